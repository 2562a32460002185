#include "flip/orbits.hpp"

#include <algorithm>
#include <cmath>

#include "flip/error.hpp"
#include "flip/winding.hpp"

namespace flip {

const char* orientability_name(Orientability o) {
    switch (o) {
        case Orientability::Orientable: return "orientable";
        case Orientability::Nonorientable: return "nonorientable";
        case Orientability::Complex: return "complex";
    }
    return "complex";
}

Vec3 SectionPlane::tangent1() const {
    Vec3 n = normalized(normal);
    Vec3 trial = std::fabs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    return normalized(trial - dot(trial, n) * n);
}

Vec3 SectionPlane::tangent2() const { return cross(normalized(normal), tangent1()); }

Vec3 SectionPlane::lift(double u1, double u2) const {
    Vec3 n = normalized(normal);
    return (offset / norm(normal)) * n + u1 * tangent1() + u2 * tangent2();
}

std::pair<double, double> SectionPlane::coords(const Vec3& x) const {
    return {dot(x, tangent1()), dot(x, tangent2())};
}

ReturnHit section_return(const Params& p, const SectionPlane& sec, const Vec3& start, int k,
                         double t_max) {
    std::vector<EventSpec> events;
    events.push_back(
        EventSpec::plane(sec.normal, sec.offset, sec.crossing, EventAction::Record, k));

    IntegratorConfig cfg;
    cfg.t_max = t_max;
    cfg.store_dense = false;
    cfg.store_samples = false;

    Trajectory traj = integrate(p, start, cfg, events);
    if (traj.termination != Termination::EventCap)
        raise(errc::no_return, "flow did not return to the section");
    const Vec3& hit = traj.final_state;
    double nf = dot(normalized(sec.normal), eval_field(p, hit));
    if (std::fabs(nf) < 1e-6)
        raise(errc::section_not_transverse, "|n.f| below transversality floor at crossing");
    return {hit, traj.t_final - traj.t0};
}

namespace {

// fixed-horizon flow map used by the multiple-shooting corrector
Vec3 flow_to(const Params& p, const Vec3& x, double tau) {
    if (tau <= 0.0) raise(errc::invalid_argument, "non-positive segment time");
    IntegratorConfig cfg;
    cfg.t_max = tau;
    cfg.store_dense = false;
    cfg.store_samples = false;
    cfg.r_escape = 100.0;
    Trajectory traj = integrate(p, x, cfg, {});
    if (traj.termination != Termination::TimeLimit)
        raise(errc::divergence, "segment flow left the working region");
    return traj.final_state;
}

// dense Gaussian elimination with partial pivoting for the shooting systems
bool solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::fabs(A[r * n + k]) > std::fabs(A[piv * n + k])) piv = r;
        if (std::fabs(A[piv * n + k]) < 1e-300) return false;
        if (piv != k) {
            for (int c = k; c < n; ++c) std::swap(A[piv * n + c], A[k * n + c]);
            std::swap(b[piv], b[k]);
        }
        for (int r = k + 1; r < n; ++r) {
            double f = A[r * n + k] / A[k * n + k];
            if (f == 0.0) continue;
            for (int c = k; c < n; ++c) A[r * n + c] -= f * A[k * n + c];
            b[r] -= f * b[k];
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        double s = b[k];
        for (int c = k + 1; c < n; ++c) s -= A[k * n + c] * b[c];
        b[k] = s / A[k * n + k];
    }
    return true;
}

// Equal-time multiple-shooting solve of a closed orbit. points[0] lies on the
// section (its lifted coordinates are the first two unknowns), the rest are
// free 3D points; the period closes the system.
struct ShootState {
    std::vector<Vec3> points;
    double period;
};

ShootState solve_multishoot(const Params& p, const SectionPlane& sec,
                            const std::vector<Vec3>& seed_points, double T_seed,
                            int max_iter = 40) {
    const int m = int(seed_points.size());
    if (m < 2) raise(errc::invalid_argument, "need at least two shooting points");
    const int n_unknowns = 3 * m;  // (u1, u2), m-1 free points, T

    Vec3 nrm = normalized(sec.normal);
    Vec3 t1 = sec.tangent1(), t2 = sec.tangent2();

    std::vector<double> z(n_unknowns);
    {
        Vec3 p0 = seed_points[0] - (dot(nrm, seed_points[0]) - sec.offset / norm(sec.normal)) * nrm;
        z[0] = dot(p0, t1);
        z[1] = dot(p0, t2);
        for (int i = 1; i < m; ++i) {
            z[2 + 3 * (i - 1) + 0] = seed_points[i].x;
            z[2 + 3 * (i - 1) + 1] = seed_points[i].y;
            z[2 + 3 * (i - 1) + 2] = seed_points[i].z;
        }
        z[n_unknowns - 1] = T_seed;
    }

    auto point_at = [&](const std::vector<double>& zz, int i) -> Vec3 {
        if (i == 0) return sec.lift(zz[0], zz[1]);
        return {zz[2 + 3 * (i - 1)], zz[2 + 3 * (i - 1) + 1], zz[2 + 3 * (i - 1) + 2]};
    };

    auto residual = [&](const std::vector<double>& zz, std::vector<double>& F) {
        double T = zz[n_unknowns - 1];
        if (T <= 0.05) raise(errc::newton_diverged, "period collapsed during Newton");
        double tau = T / m;
        for (int i = 0; i < m; ++i) {
            Vec3 next = flow_to(p, point_at(zz, i), tau);
            Vec3 target = point_at(zz, (i + 1) % m);
            F[3 * i + 0] = next.x - target.x;
            F[3 * i + 1] = next.y - target.y;
            F[3 * i + 2] = next.z - target.z;
        }
    };

    std::vector<double> F(n_unknowns), Ftmp(n_unknowns);
    residual(z, F);
    auto norm_inf = [](const std::vector<double>& v) {
        double a = 0.0;
        for (double x : v) a = std::max(a, std::fabs(x));
        return a;
    };
    double res = norm_inf(F);

    const double tol = 1e-10;
    for (int it = 0; it < max_iter && res > tol; ++it) {
        // forward-difference Jacobian
        std::vector<double> J(n_unknowns * n_unknowns);
        const double fd = 1e-8;
        for (int c = 0; c < n_unknowns; ++c) {
            std::vector<double> zp = z;
            double h = fd * std::max(1.0, std::fabs(z[c]));
            zp[c] += h;
            residual(zp, Ftmp);
            for (int r = 0; r < n_unknowns; ++r) J[r * n_unknowns + c] = (Ftmp[r] - F[r]) / h;
        }
        std::vector<double> step = F;
        for (double& v : step) v = -v;
        std::vector<double> Jcopy = J;
        if (!solve_dense(Jcopy, step, n_unknowns))
            raise(errc::newton_diverged, "singular shooting Jacobian");

        double lambda = 1.0;
        bool improved = false;
        for (int damp = 0; damp < 6; ++damp) {
            std::vector<double> zn = z;
            for (int c = 0; c < n_unknowns; ++c) zn[c] += lambda * step[c];
            try {
                residual(zn, Ftmp);
                double rn = norm_inf(Ftmp);
                if (rn < res || rn <= tol) {
                    z = zn;
                    F = Ftmp;
                    res = rn;
                    improved = true;
                    break;
                }
            } catch (const Error&) {
            }
            lambda /= 2.0;
        }
        if (!improved) raise(errc::newton_diverged, "shooting Newton stalled");
    }
    if (res > tol) raise(errc::newton_diverged, "shooting Newton ran out of iterations");

    ShootState out;
    out.period = z[n_unknowns - 1];
    for (int i = 0; i < m; ++i) out.points.push_back(point_at(z, i));
    return out;
}

// section crossing count (with direction filter) along one period
int count_loops(const Params& p, const SectionPlane& sec, const Vec3& x0, double T) {
    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane(sec.normal, sec.offset, sec.crossing));
    IntegratorConfig cfg;
    cfg.t_max = T * (1.0 - 1e-9);
    cfg.store_dense = false;
    cfg.store_samples = false;
    Trajectory traj = integrate(p, x0, cfg, events);
    return int(traj.events.size()) + 1;  // the closing crossing at t = T
}

PeriodicOrbit finish_orbit(const Params& p, const SectionPlane& sec, const ShootState& sol,
                           const std::string& label) {
    PeriodicOrbit orbit;
    orbit.fixed_point = sol.points[0];
    orbit.period = sol.period;
    orbit.label = label;
    orbit.section = sec;
    orbit.shoot_points = sol.points;
    if (orbit.period <= 0.0) raise(errc::newton_diverged, "non-positive period");

    double nf = dot(normalized(sec.normal), eval_field(p, orbit.fixed_point));
    if (std::fabs(nf) < 1e-6)
        raise(errc::section_not_transverse, "orbit tangent to its section");
    if ((sec.crossing == EventDirection::Increasing && nf < 0.0)
        || (sec.crossing == EventDirection::Decreasing && nf > 0.0))
        raise(errc::section_not_transverse, "orbit crosses the section the wrong way");

    // monodromy as the product of per-segment fundamental matrices
    const int m = int(sol.points.size());
    Mat3 M = Mat3::identity();
    double trace_int = 0.0;
    for (int i = 0; i < m; ++i) {
        FrameTransport ft = transport_frame(p, sol.points[i], sol.period / m);
        M = ft.Phi * M;
        trace_int += ft.trace_integral;
    }
    orbit.monodromy = M;
    orbit.trace_integral = trace_int;
    orbit.loop_count = count_loops(p, sec, orbit.fixed_point, orbit.period);

    // nontrivial multipliers: deflate onto the section tangent plane by the
    // oblique projection along the flow direction
    Vec3 n = normalized(sec.normal);
    Vec3 f = eval_field(p, orbit.fixed_point);
    Vec3 t1 = sec.tangent1(), t2 = sec.tangent2();
    auto project = [&](const Vec3& v) { return v - (dot(n, v) / dot(n, f)) * f; };
    Vec3 m1 = project(M * t1);
    Vec3 m2 = project(M * t2);
    double a11 = dot(t1, m1), a12 = dot(t1, m2);
    double a21 = dot(t2, m1), a22 = dot(t2, m2);
    double tr = a11 + a22, dt = a11 * a22 - a12 * a21;
    double disc = tr * tr / 4.0 - dt;
    std::complex<double> l1, l2;
    if (disc >= 0.0) {
        double sq = std::sqrt(disc);
        l1 = tr / 2.0 - sq;
        l2 = tr / 2.0 + sq;
    } else {
        double sq = std::sqrt(-disc);
        l1 = {tr / 2.0, -sq};
        l2 = {tr / 2.0, sq};
    }
    if (std::abs(l1) > std::abs(l2)) std::swap(l1, l2);
    orbit.L1 = l1;
    orbit.L2 = l2;
    orbit.orientability = disc < 0.0 ? Orientability::Complex
                          : (l1.real() > 0.0 ? Orientability::Orientable
                                             : Orientability::Nonorientable);
    return orbit;
}

std::vector<Vec3> resample_loop(const Trajectory& traj, double t_a, double t_b, int m) {
    std::vector<Vec3> pts;
    for (int i = 0; i < m; ++i) pts.push_back(traj.state_at(t_a + (t_b - t_a) * i / m));
    return pts;
}

int segments_for(double T) { return std::clamp(int(std::ceil(T / 0.9)), 6, 64); }

}  // namespace

PeriodicOrbit find_periodic_orbit(const Params& p, const SectionPlane& sec, const Vec3& guess,
                                  int loop_count, const std::string& label) {
    if (loop_count < 1 || loop_count > 16)
        raise(errc::invalid_argument, "loop_count must be in [1, 16]");

    // build the initial loop from the arc between the first section crossing
    // downstream of the guess and the loop_count-th one after it, then refine
    // with equal-time multiple shooting
    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane(sec.normal, sec.offset, sec.crossing, EventAction::Record,
                                      loop_count + 1));
    IntegratorConfig cfg;
    cfg.t_max = 400.0;
    Trajectory traj = integrate(p, guess, cfg, events);
    if (traj.termination != Termination::EventCap)
        raise(errc::no_return, "flow did not return to the section");
    double t_a = traj.events.front().t;
    double T0 = traj.t_final - t_a;
    if (T0 <= 0.1) raise(errc::no_return, "degenerate loop between crossings");

    int m = segments_for(T0);
    std::vector<Vec3> seed_pts = resample_loop(traj, t_a, t_a + T0, m);
    seed_pts[0] = traj.events.front().state;
    ShootState sol = solve_multishoot(p, sec, seed_pts, T0, 16);
    PeriodicOrbit orbit = finish_orbit(p, sec, sol, label);
    if (orbit.loop_count != loop_count)
        raise(errc::newton_diverged, "converged orbit has a different loop count");
    return orbit;
}

PeriodicOrbit refine_orbit(const Params& p, const PeriodicOrbit& seed, const std::string& label) {
    if (seed.shoot_points.empty()) raise(errc::invalid_argument, "seed orbit lacks loop points");
    ShootState sol = solve_multishoot(p, seed.section, seed.shoot_points, seed.period);
    return finish_orbit(p, seed.section, sol, label.empty() ? seed.label : label);
}

PeriodicOrbit find_attracting_orbit(const Params& p, double t_settle) {
    SectionPlane sec = SectionPlane::default_section();
    const Vec3 ics[] = {{0.15, 0.0, 0.005}, {0.2, 0.0, 0.01}, {0.12, 0.0, 0.003},
                        {0.25, 0.0, 0.012}, {0.1, 0.0, 0.002}};
    for (const Vec3& ic : ics) {
        std::vector<EventSpec> events;
        events.push_back(EventSpec::plane(sec.normal, sec.offset, sec.crossing,
                                          EventAction::Record, 400));
        IntegratorConfig cfg;
        cfg.t_max = t_settle;
        cfg.store_dense = false;
        cfg.store_samples = false;
        Trajectory traj;
        try {
            traj = integrate(p, ic, cfg, events);
        } catch (const Error&) {
            continue;
        }
        const auto& evs = traj.events;
        if (evs.size() < 24) continue;
        // detect a settled cycle in the crossing sequence
        for (int cycle : {1, 2, 4, 8}) {
            std::size_t k = evs.size();
            bool settled = true;
            for (int j = 0; j < 3 * cycle && settled; ++j) {
                Vec3 d = evs[k - 1 - j].state - evs[k - 1 - j - cycle].state;
                if (norm(d) > 1e-7) settled = false;
            }
            if (!settled) continue;
            try {
                return find_periodic_orbit(p, sec, evs[k - 1].state, cycle, "Gamma_a");
            } catch (const Error&) {
            }
        }
    }
    raise(errc::orbit_missing, "no attracting periodic orbit from the probe seeds");
}

namespace {

// tame parameter point for bootstrapping the primary orbits: just inside the
// fold of the primary orbit pair, scaled along the unfolding from the flip
// point at alpha* ~ 0.3695
double bootstrap_mu(double alpha) { return -0.0559 * (alpha - 0.3695); }

PeriodicOrbit continue_to(const Params& base, PeriodicOrbit orbit, double mu_from,
                          double mu_target);

}  // namespace

PeriodicOrbit find_primary_orbit(const Params& p, bool orientable) {
    SectionPlane sec = SectionPlane::default_section();

    // direct attempt: harvest seeds from the W^u(0) flow
    std::vector<Vec3> seeds;
    try {
        Trajectory traced;
        WindingConfig wc;
        wc.t_max = 1000.0;
        compute_zeta_traced(p, wc, traced);
        for (auto dir : {EventDirection::Increasing, EventDirection::Decreasing}) {
            auto evs = scan_events(traced, EventSpec::plane(sec.normal, sec.offset, dir));
            int taken = 0;
            for (auto it = evs.rbegin(); it != evs.rend() && taken < 2; ++it, ++taken)
                seeds.push_back(it->state);
        }
    } catch (const Error&) {
    }
    for (const Vec3& seed : seeds) {
        try {
            PeriodicOrbit orbit = find_periodic_orbit(p, sec, seed, 1);
            if (orbit.orientability == Orientability::Complex) continue;
            if ((orbit.orientability == Orientability::Orientable) == orientable) {
                orbit.label = orientable ? "Gamma_o" : "Gamma_t";
                return orbit;
            }
        } catch (const Error&) {
        }
    }

    // bootstrap at a tame mu and continue along the branch
    double mu_easy = bootstrap_mu(p.alpha);
    if (!(mu_easy < 0.0))
        raise(errc::orbit_missing, "no primary orbit and no bootstrap window at this alpha");
    Params easy = p;
    easy.mu = mu_easy;

    PeriodicOrbit seed_orbit = find_attracting_orbit(easy);
    if (!orientable) {
        PeriodicOrbit gt = continue_to(p, seed_orbit, mu_easy, p.mu);
        if (gt.orientability != Orientability::Nonorientable)
            raise(errc::orbit_missing, "continued branch is not the twisted orbit");
        gt.label = "Gamma_t";
        return gt;
    }

    // the orientable partner sits close to the attracting orbit near the fold
    PeriodicOrbit go;
    bool found = false;
    Vec3 t1 = sec.tangent1(), t2 = sec.tangent2();
    for (double d1 : {0.0, 0.01, -0.01, 0.03, -0.03, 0.06, -0.06}) {
        for (double d2 : {0.0, 0.005, -0.005, 0.015, -0.015}) {
            if (d1 == 0.0 && d2 == 0.0) continue;
            try {
                PeriodicOrbit cand = find_periodic_orbit(
                    easy, sec, seed_orbit.fixed_point + d1 * t1 + d2 * t2, 1);
                if (cand.orientability == Orientability::Orientable
                    && norm(cand.fixed_point - seed_orbit.fixed_point) > 1e-7) {
                    go = cand;
                    found = true;
                    break;
                }
            } catch (const Error&) {
            }
        }
        if (found) break;
    }
    if (!found) raise(errc::orbit_missing, "orientable partner not found near the fold");
    go = continue_to(p, go, mu_easy, p.mu);
    if (go.orientability != Orientability::Orientable)
        raise(errc::orbit_missing, "continued branch lost orientability");
    go.label = "Gamma_o";
    return go;
}

PeriodicOrbit find_doubled_orbit(const Params& p, const PeriodicOrbit& base) {
    if (base.orientability != Orientability::Nonorientable)
        raise(errc::invalid_argument, "doubling requires a negative-multiplier orbit");
    double target = std::fabs(base.L1.real() + 1.0) < std::fabs(base.L2.real() + 1.0)
                        ? base.L1.real()
                        : base.L2.real();
    Mat3 A = base.monodromy;
    A(0, 0) -= target;
    A(1, 1) -= target;
    A(2, 2) -= target;
    Vec3 cands[3] = {cross(row(A, 0), row(A, 1)), cross(row(A, 0), row(A, 2)),
                     cross(row(A, 1), row(A, 2))};
    Vec3 v = cands[0];
    for (int i = 1; i < 3; ++i)
        if (norm(cands[i]) > norm(v)) v = cands[i];
    v = normalized(v);

    const int m = int(base.shoot_points.size());
    for (double delta : {2e-3, 6e-3, 2e-2, -2e-3, -6e-3, -2e-2}) {
        // two laps around the base orbit, split to either side of it
        std::vector<Vec3> seed_pts;
        for (int lap = 0; lap < 2; ++lap) {
            double side = lap == 0 ? +1.0 : -1.0;
            for (int i = 0; i < m; ++i) seed_pts.push_back(base.shoot_points[i] + side * delta * v);
        }
        try {
            ShootState sol = solve_multishoot(p, base.section, seed_pts, 2.0 * base.period);
            PeriodicOrbit d = finish_orbit(p, base.section, sol, {});
            bool cover = true;
            for (int i = 0; i < m && cover; ++i)
                if (norm(sol.points[i] - sol.points[m + i]) > 1e-7) cover = false;
            if (!cover && norm(d.fixed_point - base.fixed_point) > 1e-8) return d;
        } catch (const Error&) {
        }
    }
    raise(errc::orbit_missing, "no doubled orbit near the base orbit");
}

namespace {

PeriodicOrbit continue_to(const Params& base, PeriodicOrbit orbit, double mu_from,
                          double mu_target) {
    double mu = mu_from;
    double dir = mu_target > mu ? 1.0 : -1.0;
    double step = 2.5e-4;
    const double floor_ = 1e-9;
    while (dir * (mu_target - mu) > 1e-15) {
        double next = std::fabs(mu_target - mu) <= step ? mu_target : mu + dir * step;
        Params p = base;
        p.mu = next;
        try {
            orbit = refine_orbit(p, orbit, orbit.label);
            mu = next;
            step = std::min(step * 1.6, 2.5e-4);
        } catch (const Error&) {
            step /= 2.0;
            if (step < floor_)
                raise(errc::step_floor_reached, "continuation fold before target mu");
        }
    }
    return orbit;
}

}  // namespace

ContinuationResult continue_orbit(const Params& p0, const PeriodicOrbit& orbit, double mu_target,
                                  double initial_step, double step_floor) {
    ContinuationResult out;
    out.branch.push_back({p0.mu, orbit});

    double mu = p0.mu;
    double dir = mu_target > mu ? 1.0 : -1.0;
    double step = std::fabs(initial_step);
    PeriodicOrbit cur = orbit;

    while (dir * (mu_target - mu) > 1e-15) {
        double next = std::fabs(mu_target - mu) <= step ? mu_target : mu + dir * step;
        Params p = p0;
        p.mu = next;
        try {
            cur = refine_orbit(p, cur, orbit.label);
            out.branch.push_back({next, cur});
            mu = next;
            step = std::min(step * 1.6, std::fabs(initial_step));
        } catch (const Error&) {
            step /= 2.0;
            if (step < step_floor) {
                out.hit_fold = true;
                out.last_good_mu = mu;
                out.first_failed_mu = next;
                return out;
            }
        }
    }
    return out;
}

OrbitBranch::OrbitBranch(const Params& base, const PeriodicOrbit& seed, double mu_seed)
    : base_(base), loop_count_(seed.loop_count) {
    known_.emplace(mu_seed, seed);
}

const PeriodicOrbit& OrbitBranch::at(double mu) {
    auto exact = known_.find(mu);
    if (exact != known_.end()) return exact->second;

    auto it = known_.lower_bound(mu);
    if (it == known_.end()) --it;
    if (it != known_.begin()) {
        auto prev = std::prev(it);
        if (std::fabs(prev->first - mu) < std::fabs(it->first - mu)) it = prev;
    }
    double mu0 = it->first;
    Params p0 = base_;
    p0.mu = mu0;
    ContinuationResult res = continue_orbit(p0, it->second, mu, 2.5e-4);
    if (res.hit_fold)
        raise(errc::step_floor_reached, "continuation fold before reaching requested mu");
    for (auto& [m, o] : res.branch) known_.emplace(m, o);
    // the march may stop a rounding ulp short of the requested key
    known_.emplace(mu, res.branch.back().second);
    return known_.at(mu);
}

double detect_multiplier_event(OrbitBranch& branch, MultiplierTarget target, double mu_lo,
                               double mu_hi, double tol) {
    if (!(mu_lo < mu_hi)) raise(errc::invalid_argument, "empty mu bracket");

    if (target == MultiplierTarget::PlusOne) {
        auto exists = [&](double mu) {
            try {
                branch.at(mu);
                return true;
            } catch (const Error&) {
                return false;
            }
        };
        bool lo = exists(mu_lo), hi = exists(mu_hi);
        if (lo == hi) raise(errc::no_bracket, "orbit existence does not change over the bracket");
        while (mu_hi - mu_lo > std::max(tol, 1e-7)) {
            double mid = 0.5 * (mu_lo + mu_hi);
            if (exists(mid) == lo)
                mu_lo = mid;
            else
                mu_hi = mid;
        }
        double mu_edge = lo ? mu_lo : mu_hi;  // last solvable side
        double toward = lo ? -1.0 : +1.0;     // direction away from the fold
        // square-root fold law: (1 - L)^2 is linear in mu; extrapolate to 0
        double m1 = mu_edge + toward * 4.0e-6;
        double m2 = mu_edge + toward * 1.6e-5;
        try {
            auto near_one = [&](double mu) {
                const PeriodicOrbit& o = branch.at(mu);
                double l = std::fabs(o.L1.real() - 1.0) < std::fabs(o.L2.real() - 1.0)
                               ? o.L1.real()
                               : o.L2.real();
                return (1.0 - l) * (1.0 - l);
            };
            double y1 = near_one(m1), y2 = near_one(m2);
            double slope = (y2 - y1) / (m2 - m1);
            if (slope != 0.0) {
                double mu_fold = m1 - y1 / slope;
                if (std::fabs(mu_fold - mu_edge) < 10.0 * std::fabs(m2 - mu_edge))
                    return mu_fold;
            }
        } catch (const Error&) {
        }
        return 0.5 * (mu_lo + mu_hi);
    }

    auto metric = [&](double mu) -> double {
        const PeriodicOrbit& o = branch.at(mu);
        if (target == MultiplierTarget::MinusOne) {
            if (o.orientability == Orientability::Complex)
                raise(errc::detector_failure, "complex multipliers while tracking -1 crossing");
            double most_negative = std::min(o.L1.real(), o.L2.real());
            return most_negative + 1.0;
        }
        double tr = o.L1.real() + o.L2.real();
        double dt = (o.L1 * o.L2).real();
        return tr * tr / 4.0 - dt;
    };

    double flo = metric(mu_lo), fhi = metric(mu_hi);
    if (flo == 0.0) return mu_lo;
    if (fhi == 0.0) return mu_hi;
    if ((flo > 0.0) == (fhi > 0.0)) raise(errc::no_bracket, "multiplier metric does not change sign");
    while (mu_hi - mu_lo > tol) {
        double mid = 0.5 * (mu_lo + mu_hi);
        double fm = metric(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            mu_lo = mid;
            flo = fm;
        } else {
            mu_hi = mid;
        }
    }
    return 0.5 * (mu_lo + mu_hi);
}

ReturnMapData collect_returns(const Params& p, const Vec3& s0, const SectionPlane& sec, int n,
                              int n_skip, double t_max) {
    if (n < 2) raise(errc::invalid_argument, "need at least two returns");

    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane(sec.normal, sec.offset, sec.crossing, EventAction::Record,
                                      n_skip + n + 1));
    IntegratorConfig cfg;
    cfg.t_max = t_max;
    cfg.store_dense = false;
    cfg.store_samples = false;

    Trajectory traj = integrate(p, s0, cfg, events);
    std::vector<double> xs;
    for (const EventRecord& ev : traj.events)
        if (ev.event_id == 0) xs.push_back(ev.state.x);
    if ((int)xs.size() < n_skip + n + 1)
        raise(errc::insufficient_returns, "trajectory produced too few section returns");

    std::vector<double> tail(xs.end() - (n + 1), xs.end());
    double lo = *std::min_element(tail.begin(), tail.end());
    double hi = *std::max_element(tail.begin(), tail.end());
    if (hi - lo < 1e-9 * std::max(1.0, std::fabs(hi)))
        raise(errc::constant_sequence, "post-transient returns are constant; rescaling degenerates");

    ReturnMapData out;
    out.raw_min = lo;
    out.raw_max = hi;
    for (double x : tail) out.scaled.push_back((x - lo) / (hi - lo));
    for (std::size_t i = 0; i + 1 < out.scaled.size(); ++i)
        out.pairs.push_back({out.scaled[i], out.scaled[i + 1]});
    return out;
}

}  // namespace flip
