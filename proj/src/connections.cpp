#include "flip/connections.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <memory>

#include "flip/error.hpp"
#include "flip/local_manifold.hpp"
#include "flip/winding.hpp"

namespace flip {

namespace {

Params with_mu(const Params& base, double mu) {
    Params p = base;
    p.mu = mu;
    return p;
}

// eigenbasis coefficients of an offset from the origin
Vec3 eigen_coords(const EigenData& eig, const Vec3& offset) {
    Mat3 E;
    for (int r = 0; r < 3; ++r) {
        E(r, 0) = eig.e_ss[r];
        E(r, 1) = eig.e_s[r];
        E(r, 2) = eig.e_u[r];
    }
    Vec3 c;
    if (!solve3(E, offset, c)) raise(errc::not_a_saddle, "degenerate eigenbasis");
    return c;  // (c_ss, c_s, c_u)
}

}  // namespace

GapMeasurement homoclinic_split(const Params& p, const SplitConfig& sc) {
    StableGraph graph(p, 10);
    const EigenData& eig = graph.eigen();
    Vec3 seed = sc.seed_offset * eig.e_u;
    if (eval_field(p, seed).x < 0.0) seed = -1.0 * seed;

    Equilibrium q = find_q(p);

    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane({1, 0, 0}, q.location.x));  // 0: Sigma
    events.push_back(EventSpec::half_space_entry());              // 1: dV entry
    events.push_back(EventSpec::sphere({0, 0, 0}, sc.r_loc));     // 2: measurement sphere
    events.push_back(EventSpec::sphere({0, 0, 0}, sc.r_far));     // 3: excursion marker

    IntegratorConfig cfg;
    cfg.rel_tol = sc.rel_tol;
    cfg.abs_tol = sc.abs_tol;
    cfg.t_max = sc.t_max;

    Trajectory traj = integrate(p, seed, cfg, events);

    GapMeasurement gap;
    for (const EventRecord& ev : traj.events)
        if (ev.event_id == 0) gap.sigma_crossings++;

    // the primary excursion must first leave the r_far ball
    double t_far = -1.0;
    for (const EventRecord& ev : traj.events)
        if (ev.event_id == 3 && ev.direction > 0) {
            t_far = ev.t;
            break;
        }
    if (t_far < 0.0) raise(errc::no_close_approach, "trajectory never left the origin region");

    // deep tier: entries into the measurement sphere after the excursion,
    // measured as the transverse offset from the local stable graph. The
    // returning pass rides the stable manifold, so the smallest |offset|
    // belongs to it; passes re-ejected by the saddle carry large offsets.
    const EventRecord* deep = nullptr;
    double deep_res = 0.0;
    for (const EventRecord& ev : traj.events) {
        if (ev.event_id != 2 || ev.direction >= 0 || ev.t <= t_far) continue;
        double res = graph.residual(ev.state);
        if (!deep || std::fabs(res) < std::fabs(deep_res)) {
            deep = &ev;
            deep_res = res;
        }
    }
    if (deep) {
        gap.value = deep_res;
        gap.min_distance = norm(deep->state);
        gap.closest_state = deep->state;
        return gap;
    }

    // shallow tier: deepest local minimum of the distance to the origin,
    // e_u component of the offset gives the side
    ClosestPoint best{0, {0, 0, 0}, 1e300};
    const auto& samples = traj.samples;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        if (samples[i].t <= t_far) continue;
        double d0 = norm(samples[i - 1].state), d1 = norm(samples[i].state),
               d2 = norm(samples[i + 1].state);
        if (d1 <= d0 && d1 <= d2) {
            ClosestPoint cp =
                closest_approach(traj, {0, 0, 0}, samples[i - 1].t, samples[i + 1].t);
            if (cp.distance < best.distance) best = cp;
        }
    }
    if (best.distance > sc.r_reject) {
        if (traj.termination == Termination::Event) {
            // entered V without any usable return: distance proxy, V-entry sign
            ClosestPoint cp = closest_approach(traj, {0, 0, 0}, t_far, traj.t_final);
            gap.value = -cp.distance;
            gap.min_distance = cp.distance;
            gap.closest_state = cp.state;
            gap.via_fallback = true;
            return gap;
        }
        raise(errc::no_close_approach, "no close return and no boundary entry");
    }
    Vec3 coords = eigen_coords(eig, best.state);
    gap.value = coords.z;  // e_u component
    gap.min_distance = best.distance;
    gap.closest_state = best.state;
    gap.via_fallback = true;
    return gap;
}

GapMeasurement hetero_gap(const Params& p, const PeriodicOrbit& target, double t_max) {
    if (target.orientability == Orientability::Complex)
        raise(errc::complex_multipliers, "gap target must have real multipliers");

    const SectionPlane& sec = target.section;
    Vec3 t1 = sec.tangent1(), t2 = sec.tangent2();
    auto coords2 = [&](const Vec3& x) {
        return std::pair<double, double>{dot(x, t1), dot(x, t2)};
    };

    // linearized return map on the section at the fixed point
    Vec3 n = normalized(sec.normal);
    Vec3 f = eval_field(p, target.fixed_point);
    double nf = dot(n, f);
    if (std::fabs(nf) < 1e-12) raise(errc::section_not_transverse, "target section degenerate");
    auto project = [&](const Vec3& v) { return v - (dot(n, v) / nf) * f; };
    Vec3 m1 = project(target.monodromy * t1);
    Vec3 m2 = project(target.monodromy * t2);
    double a11 = dot(t1, m1), a12 = dot(t1, m2);
    double a21 = dot(t2, m1), a22 = dot(t2, m2);
    double tr = a11 + a22, dt = a11 * a22 - a12 * a21;
    double disc = tr * tr / 4.0 - dt;
    if (disc < 0.0) raise(errc::complex_multipliers, "linearized map has a complex pair");
    double sq = std::sqrt(disc);
    double lam_u = std::fabs(tr / 2.0 + sq) > std::fabs(tr / 2.0 - sq) ? tr / 2.0 + sq
                                                                       : tr / 2.0 - sq;
    double lam_s = (tr - lam_u);

    auto eigvec2 = [&](double lam) {
        double v1, v2;
        if (std::fabs(a12) > std::fabs(a21)) {
            v1 = a12;
            v2 = lam - a11;
        } else if (std::fabs(a21) > 0.0) {
            v1 = lam - a22;
            v2 = a21;
        } else {
            v1 = 1.0;
            v2 = 0.0;
        }
        double nn = std::hypot(v1, v2);
        v1 /= nn;
        v2 /= nn;
        if (v1 < 0.0 || (v1 == 0.0 && v2 < 0.0)) {
            v1 = -v1;
            v2 = -v2;
        }
        return std::pair<double, double>{v1, v2};
    };
    auto [vu1, vu2] = eigvec2(lam_u);
    auto [vs1, vs2] = eigvec2(lam_s);

    // follow W^u(0) and record its section passes
    EigenData eig = origin_eigens(p);
    Vec3 seed = 1e-7 * eig.e_u;
    if (eval_field(p, seed).x < 0.0) seed = -1.0 * seed;

    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane(sec.normal, sec.offset, sec.crossing, EventAction::Record, 400));
    events.push_back(EventSpec::half_space_entry());

    IntegratorConfig cfg;
    cfg.t_max = t_max;
    cfg.store_dense = false;
    cfg.store_samples = false;

    Trajectory traj = integrate(p, seed, cfg, events);

    auto [fp1, fp2] = coords2(target.fixed_point);
    double best_d = 1e300;
    double best_d1 = 0.0, best_d2 = 0.0;
    int passes = 0;
    for (const EventRecord& ev : traj.events) {
        if (ev.event_id != 0) continue;
        passes++;
        auto [c1, c2] = coords2(ev.state);
        double d1 = c1 - fp1, d2 = c2 - fp2;
        double d = std::hypot(d1, d2);
        if (d < best_d) {
            best_d = d;
            best_d1 = d1;
            best_d2 = d2;
        }
    }
    if (passes == 0) raise(errc::never_near_orbit, "W^u(0) never met the target section");
    if (best_d > 0.1) raise(errc::never_near_orbit, "closest section iterate above 0.1");

    // decompose the offset in the (v_s, v_u) basis
    double det = vs1 * vu2 - vs2 * vu1;
    if (std::fabs(det) < 1e-12) raise(errc::detector_failure, "eigenvectors nearly parallel");
    double b = (vs1 * best_d2 - vs2 * best_d1) / det;

    GapMeasurement gap;
    gap.value = b;
    gap.min_distance = best_d;
    gap.sigma_crossings = passes;
    return gap;
}

namespace {

// shared orbit caches for the gap detectors during one bisection run
struct GapContext {
    std::unique_ptr<OrbitBranch> branch;
    bool orientable;

    const PeriodicOrbit& orbit_at(const Params& base, double mu) {
        if (!branch) {
            // seed wherever the orbit is easy to find, then continue
            double mu_seed = mu;
            Params p = with_mu(base, mu_seed);
            PeriodicOrbit seed = find_primary_orbit(p, orientable);
            branch = std::make_unique<OrbitBranch>(base, seed, mu_seed);
        }
        return branch->at(mu);
    }
};

int zeta_class(const Params& p) {
    WindingResult r = compute_zeta(p);
    if (r.termination == ZetaTermination::Failed) raise(errc::detector_failure, r.error);
    return r.saturated ? -1 : r.zeta;
}

}  // namespace

int tangency_count(const Params& p, const ManifoldPatch& a, const ManifoldPatch& b,
                   const SectionPlane& section, int max_crossings) {
    if (&a == &b) raise(errc::invalid_argument, "self-comparison of a patch");
    CurveSet ta = section_trace(a, section, max_crossings);
    CurveSet tb = section_trace(b, section, max_crossings);
    if (ta.curves.empty() || tb.curves.empty()) raise(errc::empty_trace, "a trace is empty");

    Vec3 t1 = section.tangent1(), t2 = section.tangent2();
    auto flatten = [&](const CurveSet& cs) {
        std::vector<std::vector<std::pair<double, double>>> polys;
        for (const auto& c : cs.curves) {
            if (c.points.size() < 2) continue;
            std::vector<std::pair<double, double>> poly;
            for (const Vec3& pt : c.points) poly.push_back({dot(pt, t1), dot(pt, t2)});
            if (c.closed) poly.push_back(poly.front());
            polys.push_back(std::move(poly));
        }
        return polys;
    };
    auto pa = flatten(ta), pb = flatten(tb);
    if (pa.empty() || pb.empty()) raise(errc::empty_trace, "a trace has no segments");

    auto orient = [](const std::pair<double, double>& o, const std::pair<double, double>& u,
                     const std::pair<double, double>& v) {
        double cr = (u.first - o.first) * (v.second - o.second)
                  - (u.second - o.second) * (v.first - o.first);
        if (cr > 1e-9) return 1;
        if (cr < -1e-9) return -1;
        return 0;
    };
    auto crosses = [&](const std::pair<double, double>& a1, const std::pair<double, double>& a2,
                       const std::pair<double, double>& b1, const std::pair<double, double>& b2) {
        int o1 = orient(a1, a2, b1), o2 = orient(a1, a2, b2);
        int o3 = orient(b1, b2, a1), o4 = orient(b1, b2, a2);
        return o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 && o1 != o2 && o3 != o4;
    };

    int count = 0;
    for (const auto& A : pa)
        for (std::size_t i = 0; i + 1 < A.size(); ++i)
            for (const auto& B : pb)
                for (std::size_t j = 0; j + 1 < B.size(); ++j)
                    if (crosses(A[i], A[i + 1], B[j], B[j + 1])) count++;
    return count;
}

// Floquet-bundle seeds around Gamma_o at n phases on both sides.
std::vector<Vec3> bundle_seeds(const Params& p, const PeriodicOrbit& orbit, int n_phases,
                               double offset) {
    double lam = orbit.L2.real();
    Mat3 A = orbit.monodromy;
    A(0, 0) -= lam;
    A(1, 1) -= lam;
    A(2, 2) -= lam;
    Vec3 cands[3] = {cross(row(A, 0), row(A, 1)), cross(row(A, 0), row(A, 2)),
                     cross(row(A, 1), row(A, 2))};
    Vec3 v = cands[0];
    for (int i = 1; i < 3; ++i)
        if (norm(cands[i]) > norm(v)) v = cands[i];
    v = normalized(v);

    std::vector<Vec3> seeds;
    Vec3 gamma = orbit.fixed_point;
    Vec3 dir = v;
    for (int j = 0; j < n_phases; ++j) {
        Vec3 dn = normalized(dir);
        seeds.push_back(gamma + offset * dn);
        seeds.push_back(gamma - offset * dn);
        if (j + 1 < n_phases) {
            FrameTransport ft = transport_frame(p, gamma, orbit.period / n_phases);
            dir = ft.Phi * dn;
            gamma = ft.final_state;
        }
    }
    return seeds;
}

// Number of transverse crossings of the W^u(Gamma_o) family with the stable
// set of the target (the origin's W^s for the fold detector F, Gamma_o's own
// W^s for Tan). Counted as strict sign changes of the transverse offset along
// the cyclic seed family; it drops by an even number across a tangency.
int tangency_detector_count(const Params& p, bool against_origin_manifold) {
    SectionPlane sec = SectionPlane::default_section();
    PeriodicOrbit gamma_o = find_primary_orbit(p, true);
    const int n_phases = 64;
    const double offset = 3e-3;
    std::vector<Vec3> seeds = bundle_seeds(p, gamma_o, n_phases, offset);

    if (against_origin_manifold) {
        // fold detector F: while W^s(0) cuts the W^u(Gamma_o) sheet, part of
        // the seed family escapes into V; past the tangency none does
        int v_fates = 0;
        for (const Vec3& seed : seeds) {
            std::vector<EventSpec> events;
            events.push_back(EventSpec::half_space_entry());
            IntegratorConfig cfg;
            cfg.t_max = 700.0;
            cfg.store_dense = false;
            cfg.store_samples = false;
            try {
                Trajectory traj = integrate(p, seed, cfg, events);
                if (traj.termination == Termination::Event) v_fates++;
            } catch (const Error&) {
            }
        }
        return v_fates;
    }

    // Tan detector: sign changes of the first-return offset from W^s(Gamma_o)
    // along the family, compared only within runs of equal escape turn
    Vec3 n = normalized(sec.normal);
    Vec3 f = eval_field(p, gamma_o.fixed_point);
    Vec3 t1 = sec.tangent1(), t2 = sec.tangent2();
    auto project = [&](const Vec3& v) { return v - (dot(n, v) / dot(n, f)) * f; };
    Vec3 m1 = project(gamma_o.monodromy * t1);
    Vec3 m2 = project(gamma_o.monodromy * t2);
    double a11 = dot(t1, m1), a12 = dot(t1, m2);
    double a21 = dot(t2, m1), a22 = dot(t2, m2);
    double tr = a11 + a22, dt = a11 * a22 - a12 * a21;
    double disc = tr * tr / 4.0 - dt;
    if (disc < 0.0) raise(errc::complex_multipliers, "Gamma_o map has a complex pair");
    double sq = std::sqrt(disc);
    double lam_u = std::fabs(tr / 2.0 + sq) > std::fabs(tr / 2.0 - sq) ? tr / 2.0 + sq
                                                                       : tr / 2.0 - sq;
    double lam_s = tr - lam_u;
    auto eigvec2 = [&](double lam, double& v1, double& v2) {
        if (std::fabs(a12) > std::fabs(a21)) {
            v1 = a12;
            v2 = lam - a11;
        } else {
            v1 = lam - a22;
            v2 = a21;
        }
        double nn = std::hypot(v1, v2);
        v1 /= nn;
        v2 /= nn;
        if (v1 < 0.0 || (v1 == 0.0 && v2 < 0.0)) {
            v1 = -v1;
            v2 = -v2;
        }
    };
    double vu1, vu2, vs1, vs2;
    eigvec2(lam_u, vu1, vu2);
    eigvec2(lam_s, vs1, vs2);
    double det2 = vs1 * vu2 - vs2 * vu1;
    double fp1 = dot(gamma_o.fixed_point, t1), fp2 = dot(gamma_o.fixed_point, t2);

    struct Meas {
        int turn = -1;
        double b = 0.0;
        bool ok = false;
    };
    std::vector<Meas> side[2];
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        std::vector<EventSpec> events;
        events.push_back(
            EventSpec::plane(sec.normal, sec.offset, sec.crossing, EventAction::Record, 400));
        events.push_back(EventSpec::half_space_entry());
        IntegratorConfig cfg;
        cfg.t_max = 500.0;
        cfg.store_dense = false;
        cfg.store_samples = false;
        Meas m;
        try {
            Trajectory traj = integrate(p, seeds[i], cfg, events);
            int turn = 0;
            bool escaped = false;
            for (const EventRecord& ev : traj.events) {
                if (ev.event_id != 0) continue;
                double d1 = dot(ev.state, t1) - fp1, d2 = dot(ev.state, t2) - fp2;
                double d = std::hypot(d1, d2);
                if (!escaped) {
                    turn++;
                    // the unwinding exits through the outer rim and the next
                    // crossing is already the horseshoe return
                    if (d > 0.12) escaped = true;
                    continue;
                }
                if (d <= 0.25) {
                    m.turn = turn;
                    m.b = (vs1 * d2 - vs2 * d1) / det2;
                    m.ok = true;
                }
                break;  // first post-escape crossing only
            }
        } catch (const Error&) {
        }
        side[i % 2].push_back(m);
    }
    int count = 0;
    for (int sd = 0; sd < 2; ++sd) {
        int n_s = int(side[sd].size());
        for (int i = 0; i < n_s; ++i) {
            const Meas& a = side[sd][i];
            const Meas& b = side[sd][(i + 1) % n_s];
            if (!a.ok || !b.ok || a.turn != b.turn) continue;
            if ((a.b > 0.0) != (b.b > 0.0)) count++;
        }
    }
    return count;
}

BifurcationPoint locate_bifurcation(const Params& base, double mu_lo, double mu_hi,
                                    Detector detector, const std::string& kind, double tol) {
    if (!(mu_lo < mu_hi)) raise(errc::invalid_argument, "empty mu bracket");

    GapContext gap_ctx;
    gap_ctx.orientable = detector == Detector::GapGammaO;

    const bool integer_detector = detector == Detector::ZetaChange
                               || detector == Detector::TangencyGammaO
                               || detector == Detector::TangencyF;
    // the winding boundary resolves to the shadowing floor; the tangency
    // counts are family-resolution limited
    if (detector == Detector::ZetaChange && tol < 3e-9) tol = 3e-9;
    if ((detector == Detector::TangencyGammaO || detector == Detector::TangencyF) && tol < 1e-6)
        tol = 1e-6;

    std::function<double(double)> continuous;
    std::function<int(double)> integral;

    switch (detector) {
        case Detector::Split:
            continuous = [&](double mu) { return homoclinic_split(with_mu(base, mu)).value; };
            break;
        case Detector::GapGammaO:
        case Detector::GapGammaT:
            continuous = [&](double mu) {
                return hetero_gap(with_mu(base, mu), gap_ctx.orbit_at(base, mu)).value;
            };
            break;
        case Detector::ZetaChange:
            integral = [&](double mu) { return zeta_class(with_mu(base, mu)); };
            break;
        case Detector::TangencyGammaO:
            integral = [&](double mu) { return tangency_detector_count(with_mu(base, mu), false); };
            break;
        case Detector::TangencyF:
            integral = [&](double mu) { return tangency_detector_count(with_mu(base, mu), true); };
            break;
    }

    BifurcationPoint pt;
    pt.kind = kind;
    pt.alpha = base.alpha;

    if (integral) {
        // tangency counts fluctuate while positive; only the drop to zero is
        // the located transition
        const bool predicate_mode =
            detector == Detector::TangencyGammaO || detector == Detector::TangencyF;
        auto klass = [&](double mu) {
            int v = integral(mu);
            return predicate_mode ? int(v > 0) : v;
        };
        int ref = klass(mu_hi);
        int lo_val = klass(mu_lo);
        if (lo_val == ref) raise(errc::no_sign_change, "integer detector constant over bracket");
        while (mu_hi - mu_lo > tol) {
            double mid = 0.5 * (mu_lo + mu_hi);
            if (klass(mid) == ref)
                mu_hi = mid;
            else
                mu_lo = mid;
        }
        pt.mu = 0.5 * (mu_lo + mu_hi);
        pt.bracket = mu_hi - mu_lo;
        return pt;
    }

    // Continuous detector. A split evaluation that fails falls back to the
    // zeta-change predicate for that midpoint. A gap evaluation that never
    // comes near the target orbit counts as the far side of the connection:
    // the gap function only exists while W^u(0) tracks the orbit, and that
    // tracking dies off across the heteroclinic point.
    int zeta_hi_ref = -2;
    const bool is_gap = detector == Detector::GapGammaO || detector == Detector::GapGammaT;
    constexpr double kFarSide = std::numeric_limits<double>::quiet_NaN();
    auto eval = [&](double mu) -> double {
        try {
            return continuous(mu);
        } catch (const Error& e) {
            if (detector == Detector::Split && e.code() == errc::no_close_approach) {
                if (zeta_hi_ref == -2) zeta_hi_ref = zeta_class(with_mu(base, mu_hi));
                return zeta_class(with_mu(base, mu)) == zeta_hi_ref ? 1.0 : -1.0;
            }
            if (is_gap && e.code() == errc::never_near_orbit) return kFarSide;
            throw;
        }
    };

    double flo = eval(mu_lo), fhi = eval(mu_hi);
    auto classify = [](double f, double ref_sign) {
        // -1: same side as ref, +1: other side (far side counts as other)
        if (std::isnan(f)) return +1;
        return (f > 0.0) == (ref_sign > 0.0) ? -1 : +1;
    };
    if (std::isnan(flo) && std::isnan(fhi)) {
        // the gap lives on a tracking sub-interval strictly inside the
        // bracket; scan for it and bisect against its upper edge
        const int NS = 24;
        double found_mu = 0.0, found_f = kFarSide;
        for (int i = 1; i < NS && std::isnan(found_f); ++i) {
            double mu = mu_lo + (mu_hi - mu_lo) * i / NS;
            double f = eval(mu);
            if (!std::isnan(f)) {
                found_mu = mu;
                found_f = f;
            }
        }
        if (std::isnan(found_f))
            raise(errc::no_sign_change, "gap detector undefined over the whole bracket");
        mu_lo = found_mu;
        flo = found_f;
    }
    if (std::isnan(flo)) {
        std::swap(mu_lo, mu_hi);
        std::swap(flo, fhi);
        // bisection below works on the [lo, hi] pair regardless of order
    }
    double ref = flo;
    if (classify(fhi, ref) < 0) {
        // same side at both ends: scan for a transition inside the bracket
        const int NS = 16;
        bool found = false;
        double a = mu_lo, fa = flo;
        for (int i = 1; i <= NS && !found; ++i) {
            double mu = mu_lo + (mu_hi - mu_lo) * i / NS;
            double f = i == NS ? fhi : eval(mu);
            if (classify(f, ref) > 0) {
                mu_lo = a;
                flo = fa;
                mu_hi = mu;
                fhi = f;
                found = true;
            }
            a = mu;
            fa = f;
        }
        if (!found) raise(errc::no_sign_change, "detector keeps its sign over the bracket");
        ref = flo;
    }

    while (std::fabs(mu_hi - mu_lo) > tol) {
        double mid = 0.5 * (mu_lo + mu_hi);
        double fm = eval(mid);
        if (!std::isnan(fm) && fm == 0.0) {
            mu_lo = mid - tol / 2;
            mu_hi = mid + tol / 2;
            break;
        }
        if (classify(fm, ref) < 0)
            mu_lo = mid;
        else
            mu_hi = mid;
    }
    pt.mu = 0.5 * (mu_lo + mu_hi);
    pt.bracket = std::fabs(mu_hi - mu_lo);
    return pt;
}

void attach_rotation_counts(const Params& p, BifurcationPoint& pt) {
    Params pp = with_mu(p, pt.mu);
    Vec3 fp_o, fp_t;
    bool have_o = false, have_t = false;
    try {
        fp_o = find_primary_orbit(pp, true).fixed_point;
        have_o = true;
    } catch (const Error&) {
    }
    try {
        fp_t = find_primary_orbit(pp, false).fixed_point;
        have_t = true;
    } catch (const Error&) {
    }

    EigenData eig = origin_eigens(pp);
    Vec3 seed = 1e-7 * eig.e_u;
    if (eval_field(pp, seed).x < 0.0) seed = -1.0 * seed;

    std::vector<EventSpec> events;
    events.push_back(EventSpec::half_space_entry());
    int id_o = -1, id_t = -1;
    if (have_o) {
        events.push_back(EventSpec::proximity(fp_o, 0.1, EventDirection::Decreasing));
        id_o = int(events.size()) - 1;
    }
    if (have_t) {
        events.push_back(EventSpec::proximity(fp_t, 0.1, EventDirection::Decreasing));
        id_t = int(events.size()) - 1;
    }

    IntegratorConfig cfg;
    cfg.t_max = 600.0;
    cfg.store_dense = false;
    cfg.store_samples = false;
    Trajectory traj = integrate(pp, seed, cfg, events);

    int n_o = 0, n_t = 0;
    for (const EventRecord& ev : traj.events) {
        if (ev.event_id == id_o) n_o++;
        if (ev.event_id == id_t) n_t++;
    }
    // the outbound and inbound primary legs stay clear of the orbit balls,
    // so the Gamma_o entries are the rotations themselves; the deep pass by
    // the origin grazes Gamma_t's neighborhood once and is not a rotation
    pt.loops_gamma_o = have_o ? n_o : 0;
    pt.loops_gamma_t = have_t ? std::max(0, n_t - 1) : 0;
}

double orientation_index(const Params& p, double truncation_radius) {
    GapMeasurement split = homoclinic_split(p);
    if (std::fabs(split.value) > 1e-6)
        raise(errc::not_on_homoclinic_locus, "split exceeds 1e-6 at the probe point");

    const double r0 = truncation_radius;
    StableGraph graph(p, 12);
    const EigenData& eig = graph.eigen();
    AdjointBasis adj = adjoint_basis(eig);
    Vec3 f_u = normalized(adj.f_u);
    Vec3 f_s = normalized(adj.f_s);

    // incoming point of the homoclinic orbit on the truncation sphere: the
    // first entry after the excursion (the deep-tier measurement point)
    Vec3 seed = 1e-7 * eig.e_u;
    if (eval_field(p, seed).x < 0.0) seed = -1.0 * seed;
    std::vector<EventSpec> events;
    events.push_back(EventSpec::sphere({0, 0, 0}, r0));
    events.push_back(EventSpec::sphere({0, 0, 0}, 0.5));
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;
    cfg.t_max = 100.0;
    cfg.store_dense = false;
    cfg.store_samples = false;
    Trajectory run = integrate(p, seed, cfg, events);
    double t_far = -1.0;
    const EventRecord* entry = nullptr;
    for (const EventRecord& ev : run.events) {
        if (ev.event_id == 1 && ev.direction > 0 && t_far < 0.0) t_far = ev.t;
        if (ev.event_id == 0 && ev.direction < 0 && t_far >= 0.0 && !entry) entry = &ev;
    }
    if (!entry)
        raise(errc::truncation_too_short, "homoclinic branch never re-entered the sphere");
    Vec3 x_in = entry->state;

    // exact tangent plane of the local stable sheet at the incoming point;
    // the plane is carried backward around the loop, where tangent planes of
    // W^s attract transversally, so seeding errors die out
    Vec3 c = graph.eigen_coords(x_in);
    Vec3 v2 = normalized(graph.tangent_along_ss(c.x, c.y));
    {
        Vec3 n_in = cross(normalized(eval_field(p, x_in)), v2);
        if (dot(n_in, f_u) < 0.0) v2 = -1.0 * v2;
    }

    TangentAtSphere arrive =
        transport_tangent_to_sphere(p, x_in, v2, r0, 0.5, 200.0, TimeDirection::Backward);
    if (!arrive.hit)
        raise(errc::truncation_too_short, "backward loop did not return to the sphere");

    Vec3 n_out = cross(normalized(eval_field(p, arrive.state)), normalized(arrive.tangent));
    double proj = dot(normalized(n_out), f_s);
    if (proj == 0.0) raise(errc::detector_failure, "degenerate arrival normal");
    return proj > 0.0 ? 1.0 : -1.0;
}

BifurcationPoint locate_inclination_flip(const Params& base, double alpha_lo, double alpha_hi,
                                         double tol) {
    if (!(alpha_lo < alpha_hi)) raise(errc::invalid_argument, "empty alpha bracket");
    auto index = [&](double alpha) {
        Params p = base;
        p.alpha = alpha;
        p.mu = 0.0;
        return orientation_index(p);
    };
    double ilo = index(alpha_lo), ihi = index(alpha_hi);
    if (ilo == ihi) raise(errc::no_sign_change, "same orientation at both alpha bracket ends");
    while (alpha_hi - alpha_lo > tol) {
        double mid = 0.5 * (alpha_lo + alpha_hi);
        if (index(mid) == ilo)
            alpha_lo = mid;
        else
            alpha_hi = mid;
    }
    BifurcationPoint pt;
    pt.kind = "IF";
    pt.alpha = 0.5 * (alpha_lo + alpha_hi);
    pt.mu = 0.0;
    pt.bracket = alpha_hi - alpha_lo;
    Params at = base;
    at.alpha = pt.alpha;
    pt.case_report = classify_case(at);
    return pt;
}

SliceOutcome run_table_slice(double alpha, bool include_tangency_targets) {
    SliceOutcome out;
    Params base = Params::reference(alpha, 0.0);

    auto attempt = [&](const std::string& kind, const std::function<BifurcationPoint()>& fn,
                       bool rotations) {
        try {
            BifurcationPoint pt = fn();
            if (rotations) {
                try {
                    attach_rotation_counts(base, pt);
                } catch (const Error&) {
                }
            }
            out.points.push_back(pt);
            return true;
        } catch (const Error& e) {
            out.failures.push_back(kind + ": " + e.what());
            return false;
        }
    };

    attempt("2H_t", [&] {
        return locate_bifurcation(base, -4.0e-3, -1.0e-3, Detector::ZetaChange, "2H_t", 3e-9);
    }, false);

    double h2t = out.points.empty() ? -2.880268e-3 : out.points.back().mu;
    attempt("Q0_Gt[1Go]", [&] {
        return locate_bifurcation(base, h2t - 1.2e-4, h2t + 4.0e-5, Detector::GapGammaT,
                                  "Q0_Gt[1Go]", 1e-8);
    }, true);

    attempt("H_t[2Go]", [&] {
        return locate_bifurcation(base, -4.0e-3, -3.7e-3, Detector::Split, "H_t[2Go]", 1e-8);
    }, true);

    double h2go = -3.816057e-3;
    for (const auto& pt : out.points)
        if (pt.kind == "H_t[2Go]") h2go = pt.mu;
    attempt("Q0_Gt[2Go]", [&] {
        return locate_bifurcation(base, h2go - 1.2e-4, h2go + 4.0e-5, Detector::GapGammaT,
                                  "Q0_Gt[2Go]", 1e-8);
    }, true);

    attempt("H_t[3Go]", [&] {
        return locate_bifurcation(base, -4.28e-3, -4.22e-3, Detector::Split, "H_t[3Go]", 1e-8);
    }, true);

    attempt("Q0_Go", [&] {
        return locate_bifurcation(base, -4.90e-3, -4.82e-3, Detector::GapGammaO, "Q0_Go", 1e-8);
    }, false);

    attempt("PD_Gt", [&] {
        Params seed_p = with_mu(base, -2.0e-3);
        PeriodicOrbit gt = find_primary_orbit(seed_p, false);
        OrbitBranch branch(base, gt, -2.0e-3);
        double mu = detect_multiplier_event(branch, MultiplierTarget::MinusOne, -7.30e-3,
                                            -7.10e-3, 1e-8);
        BifurcationPoint pt;
        pt.kind = "PD_Gt";
        pt.alpha = alpha;
        pt.mu = mu;
        pt.bracket = 1e-8;
        return pt;
    }, false);

    attempt("SNP_Go", [&] {
        Params seed_p = with_mu(base, -2.0e-3);
        PeriodicOrbit go = find_primary_orbit(seed_p, true);
        OrbitBranch branch(base, go, -2.0e-3);
        double mu = detect_multiplier_event(branch, MultiplierTarget::PlusOne, -7.45e-3,
                                            -7.30e-3, 1e-7);
        BifurcationPoint pt;
        pt.kind = "SNP_Go";
        pt.alpha = alpha;
        pt.mu = mu;
        pt.bracket = 1e-7;
        return pt;
    }, false);

    if (include_tangency_targets) {
        attempt("F", [&] {
            return locate_bifurcation(base, -7.10e-3, -7.00e-3, Detector::TangencyF, "F", 1e-6);
        }, false);
        attempt("Tan_Go", [&] {
            return locate_bifurcation(base, -7.10e-3, -7.05e-3, Detector::TangencyGammaO,
                                      "Tan_Go", 1e-6);
        }, false);
    }

    std::sort(out.points.begin(), out.points.end(),
              [](const BifurcationPoint& a, const BifurcationPoint& b) { return a.mu > b.mu; });
    return out;
}

}  // namespace flip
