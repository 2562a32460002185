#include "flip/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flip/error.hpp"

namespace flip {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double A71 = 35.0 / 384, A73 = 500.0 / 1113, A74 = 125.0 / 192, A75 = -2187.0 / 6784,
                 A76 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;
// dense-output weights
constexpr double D1 = -12715105075.0 / 11282082432.0;
constexpr double D3 = 87487479700.0 / 32700410799.0;
constexpr double D4 = -10690763975.0 / 1880347072.0;
constexpr double D5 = 701980252875.0 / 199316789632.0;
constexpr double D6 = -1453857185.0 / 822651844.0;
constexpr double D7 = 69997945.0 / 29380423.0;

template <std::size_t N>
using Arr = std::array<double, N>;

template <std::size_t N, class RHS>
struct Stepper {
    RHS rhs;
    double rel_tol, abs_tol;

    Arr<N> k1, k2, k3, k4, k5, k6, k7;

    // attempts one step of size h from (t, y); on success fills y_new and
    // returns the scaled error norm (accept when <= 1)
    double attempt(double t, const Arr<N>& y, double h, Arr<N>& y_new) {
        Arr<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * A21 * k1[i];
        rhs(t + C2 * h, tmp, k2);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        rhs(t + C3 * h, tmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        rhs(t + C4 * h, tmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        rhs(t + C5 * h, tmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        rhs(t + h, tmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        rhs(t + h, y_new, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            double sc = abs_tol + rel_tol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
            err += (e / sc) * (e / sc);
        }
        return std::sqrt(err / N);
    }
};

struct Dense4 {
    Arr<4> r1, r2, r3, r4, r5;

    template <class K>
    void build(const Arr<4>& y0, const Arr<4>& y1, double h, const K& k1, const K& k7,
               const K& k3, const K& k4, const K& k5, const K& k6) {
        for (int i = 0; i < 4; ++i) {
            double ydiff = y1[i] - y0[i];
            r1[i] = y0[i];
            r2[i] = ydiff;
            r3[i] = h * k1[i] - ydiff;
            r4[i] = ydiff - h * k7[i] - r3[i];
            r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }

    Arr<4> eval(double theta) const {
        double th1 = 1.0 - theta;
        Arr<4> y;
        for (int i = 0; i < 4; ++i)
            y[i] = r1[i] + theta * (r2[i] + th1 * (r3[i] + theta * (r4[i] + th1 * r5[i])));
        return y;
    }

    // d/d(theta); divide by h for d/dt
    Arr<4> deriv(double theta) const {
        double th1 = 1.0 - theta;
        Arr<4> d;
        for (int i = 0; i < 4; ++i)
            d[i] = r2[i] + (1.0 - 2.0 * theta) * r3[i] + theta * (2.0 - 3.0 * theta) * r4[i]
                 + 2.0 * theta * th1 * (1.0 - 2.0 * theta) * r5[i];
        return d;
    }
};

Vec3 xyz(const Arr<4>& y) { return {y[0], y[1], y[2]}; }

double initial_step(double max_step, double fnorm) {
    double h = 1e-4;
    if (fnorm > 0.0) h = std::min(0.01 / fnorm, max_step);
    return std::max(h, 1e-10);
}

}  // namespace

EventSpec EventSpec::plane(const Vec3& n, double d, EventDirection dir, EventAction act, int cap) {
    EventSpec e;
    e.kind = EventKind::Plane;
    e.normal = n;
    e.offset = d;
    e.direction = dir;
    e.action = act;
    e.max_count = cap;
    if (norm(n) == 0.0) raise(errc::invalid_argument, "plane normal must be nonzero");
    return e;
}

EventSpec EventSpec::sphere(const Vec3& c, double R, EventDirection dir, EventAction act, int cap) {
    EventSpec e;
    e.kind = EventKind::Sphere;
    e.center = c;
    e.radius = R;
    e.direction = dir;
    e.action = act;
    e.max_count = cap;
    if (R <= 0.0) raise(errc::invalid_argument, "sphere radius must be positive");
    return e;
}

EventSpec EventSpec::half_space_entry() {
    EventSpec e;
    e.kind = EventKind::HalfSpaceEntry;
    e.direction = EventDirection::Decreasing;
    e.action = EventAction::Terminate;
    return e;
}

EventSpec EventSpec::proximity(const Vec3& target, double r, EventDirection dir, EventAction act,
                               int cap) {
    EventSpec e;
    e.kind = EventKind::Proximity;
    e.center = target;
    e.radius = r;
    e.direction = dir;
    e.action = act;
    e.max_count = cap;
    return e;
}

double EventSpec::value(const Vec3& s) const {
    switch (kind) {
        case EventKind::Plane: return dot(normal, s) - offset;
        case EventKind::Sphere: return norm(s - center) - radius;
        case EventKind::HalfSpaceEntry: return std::max(s.x, s.y);
        case EventKind::Proximity: return norm(s - center) - radius;
    }
    return 0.0;
}

Vec3 Trajectory::state_at(double t) const {
    if (dense.empty()) raise(errc::invalid_argument, "trajectory has no dense data");
    // binary search on monotone step start times
    std::size_t lo = 0, hi = dense.size() - 1;
    bool fwd = forward();
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        bool left = fwd ? (dense[mid].t <= t) : (dense[mid].t >= t);
        if (left)
            lo = mid;
        else
            hi = mid - 1;
    }
    const DenseStep& st = dense[lo];
    double theta = (t - st.t) / st.h;
    theta = std::clamp(theta, 0.0, 1.0);
    Dense4 d{st.r1, st.r2, st.r3, st.r4, st.r5};
    return xyz(d.eval(theta));
}

Vec3 Trajectory::derivative_at(double t) const {
    if (dense.empty()) raise(errc::invalid_argument, "trajectory has no dense data");
    std::size_t lo = 0, hi = dense.size() - 1;
    bool fwd = forward();
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        bool left = fwd ? (dense[mid].t <= t) : (dense[mid].t >= t);
        if (left)
            lo = mid;
        else
            hi = mid - 1;
    }
    const DenseStep& st = dense[lo];
    double theta = std::clamp((t - st.t) / st.h, 0.0, 1.0);
    Dense4 d{st.r1, st.r2, st.r3, st.r4, st.r5};
    Arr<4> dv = d.deriv(theta);
    return {dv[0] / st.h, dv[1] / st.h, dv[2] / st.h};
}

double Trajectory::arclength_at(double t) const {
    if (dense.empty()) raise(errc::invalid_argument, "trajectory has no dense data");
    std::size_t lo = 0, hi = dense.size() - 1;
    bool fwd = forward();
    while (lo < hi) {
        std::size_t mid = (lo + hi + 1) / 2;
        bool left = fwd ? (dense[mid].t <= t) : (dense[mid].t >= t);
        if (left)
            lo = mid;
        else
            hi = mid - 1;
    }
    const DenseStep& st = dense[lo];
    double theta = std::clamp((t - st.t) / st.h, 0.0, 1.0);
    Dense4 d{st.r1, st.r2, st.r3, st.r4, st.r5};
    return d.eval(theta)[3];
}

Trajectory integrate(const Params& p, const State& s0, const IntegratorConfig& cfg,
                     const std::vector<EventSpec>& events) {
    if (!finite(s0)) raise(errc::invalid_argument, "non-finite initial state");
    if (cfg.rel_tol < 1e-14 || cfg.rel_tol > 1e-3 || cfg.abs_tol < 1e-14 || cfg.abs_tol > 1e-3)
        raise(errc::invalid_argument, "tolerances must lie in [1e-14, 1e-3]");
    if (cfg.t_max <= 0.0) raise(errc::invalid_argument, "t_max must be positive");

    const double sigma = cfg.direction == TimeDirection::Forward ? 1.0 : -1.0;
    auto rhs = [&p, sigma](double, const Arr<4>& y, Arr<4>& dy) {
        Vec3 f = eval_field(p, {y[0], y[1], y[2]});
        dy[0] = sigma * f.x;
        dy[1] = sigma * f.y;
        dy[2] = sigma * f.z;
        dy[3] = norm(f);  // arclength rate (positive either direction)
    };

    Stepper<4, decltype(rhs)> stepper{rhs, cfg.rel_tol, cfg.abs_tol};

    Trajectory traj;
    traj.t0 = 0.0;
    traj.initial_state = s0;

    Arr<4> y{s0.x, s0.y, s0.z, 0.0};
    double s = 0.0;  // internal (non-negative) time
    rhs(s, y, stepper.k1);

    if (cfg.store_samples) traj.samples.push_back({0.0, s0, 0.0});

    std::vector<int> counts(events.size(), 0);
    std::vector<double> gprev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) gprev[i] = events[i].value(s0);

    double h = initial_step(cfg.max_step, std::sqrt(stepper.k1[0] * stepper.k1[0]
                                                    + stepper.k1[1] * stepper.k1[1]
                                                    + stepper.k1[2] * stepper.k1[2]));

    auto finish = [&](double t_phys, const Vec3& st, double arc, Termination why, int ev_id) {
        traj.t_final = t_phys;
        traj.final_state = st;
        traj.arclength = arc;
        traj.termination = why;
        traj.terminating_event = ev_id;
        if (traj.samples.empty() || traj.samples.back().t != t_phys)
            traj.samples.push_back({t_phys, st, arc});
    };

    while (true) {
        bool last = false;
        if (s + h >= cfg.t_max) {
            h = cfg.t_max - s;
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, s)) {
            finish(sigma * s, xyz(y), y[3], Termination::StepUnderflow, -1);
            return traj;
        }

        Arr<4> y_new;
        double err = stepper.attempt(s, y, h, y_new);
        if (!std::isfinite(err)) {
            h *= 0.1;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.9 * std::pow(err, -0.2), 0.1);
            continue;
        }

        // accepted step: build dense representation
        Dense4 dense;
        dense.build(y, y_new, h, stepper.k1, stepper.k7, stepper.k3, stepper.k4, stepper.k5,
                    stepper.k6);
        const double t_left = sigma * s;
        const double h_phys = sigma * h;
        if (cfg.store_dense)
            traj.dense.push_back({t_left, h_phys, dense.r1, dense.r2, dense.r3, dense.r4, dense.r5});

        // event scan on the dense output
        struct Hit {
            double theta;
            int id;
            int dir;
            Vec3 state;
            double arc;
        };
        std::vector<Hit> hits;
        constexpr int NSCAN = 5;
        for (std::size_t ie = 0; ie < events.size(); ++ie) {
            const EventSpec& ev = events[ie];
            double ga = gprev[ie];
            double th_a = 0.0;
            for (int j = 1; j <= NSCAN; ++j) {
                double th_b = double(j) / NSCAN;
                double gb = ev.value(xyz(dense.eval(th_b)));
                if (ga * gb < 0.0) {
                    // bisect to the crossing
                    double lo = th_a, hi_ = th_b, glo = ga;
                    for (int it = 0; it < 80; ++it) {
                        double mid = 0.5 * (lo + hi_);
                        double gm = ev.value(xyz(dense.eval(mid)));
                        if (gm == 0.0) {
                            lo = hi_ = mid;
                            break;
                        }
                        if ((gm > 0.0) == (glo > 0.0)) {
                            lo = mid;
                            glo = gm;
                        } else {
                            hi_ = mid;
                        }
                        if (hi_ - lo < 1e-16) break;
                    }
                    double th = 0.5 * (lo + hi_);
                    int dir = (gb > ga ? +1 : -1) * (sigma > 0.0 ? +1 : -1);
                    bool pass = ev.direction == EventDirection::Any
                             || (ev.direction == EventDirection::Increasing && dir > 0)
                             || (ev.direction == EventDirection::Decreasing && dir < 0);
                    if (pass) {
                        Arr<4> ys = dense.eval(th);
                        hits.push_back({th, int(ie), dir, xyz(ys), ys[3]});
                    }
                }
                ga = gb;
                th_a = th_b;
            }
            gprev[ie] = ga;
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.theta < b.theta; });

        for (const Hit& hit : hits) {
            const EventSpec& ev = events[hit.id];
            traj.events.push_back({hit.id, t_left + hit.theta * h_phys, hit.state, hit.dir});
            counts[hit.id]++;
            bool cap = ev.max_count > 0 && counts[hit.id] >= ev.max_count;
            if (ev.action == EventAction::Terminate || cap) {
                finish(t_left + hit.theta * h_phys, hit.state, hit.arc,
                       ev.action == EventAction::Terminate ? Termination::Event : Termination::EventCap,
                       hit.id);
                return traj;
            }
        }

        // arclength cap inside this step
        if (cfg.arclength_cap && y_new[3] >= *cfg.arclength_cap) {
            double target = *cfg.arclength_cap;
            double lo = 0.0, hi_ = 1.0;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi_);
                if (dense.eval(mid)[3] < target)
                    lo = mid;
                else
                    hi_ = mid;
                if (hi_ - lo < 1e-16) break;
            }
            double th = 0.5 * (lo + hi_);
            Arr<4> ys = dense.eval(th);
            finish(t_left + th * h_phys, xyz(ys), ys[3], Termination::ArclengthCap, -1);
            return traj;
        }

        s += h;
        y = y_new;
        stepper.k1 = stepper.k7;  // FSAL
        if (cfg.store_samples) traj.samples.push_back({sigma * s, xyz(y), y[3]});

        if (norm(xyz(y)) > cfg.r_escape) {
            finish(sigma * s, xyz(y), y[3], Termination::Divergence, -1);
            return traj;
        }
        if (last || s >= cfg.t_max) {
            finish(sigma * s, xyz(y), y[3], Termination::TimeLimit, -1);
            return traj;
        }

        h = std::min(cfg.max_step, h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 10.0));
    }
}

std::vector<EventRecord> scan_events(const Trajectory& traj, const EventSpec& spec) {
    std::vector<EventRecord> out;
    constexpr int NSCAN = 5;
    for (const Trajectory::DenseStep& st : traj.dense) {
        Dense4 d{st.r1, st.r2, st.r3, st.r4, st.r5};
        double ga = spec.value(xyz(d.eval(0.0)));
        double th_a = 0.0;
        for (int j = 1; j <= NSCAN; ++j) {
            double th_b = double(j) / NSCAN;
            double gb = spec.value(xyz(d.eval(th_b)));
            if (ga * gb < 0.0) {
                double lo = th_a, hi = th_b, glo = ga;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double gm = spec.value(xyz(d.eval(mid)));
                    if (gm == 0.0) {
                        lo = hi = mid;
                        break;
                    }
                    if ((gm > 0.0) == (glo > 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                    if (hi - lo < 1e-16) break;
                }
                double th = 0.5 * (lo + hi);
                int dir = (gb > ga ? +1 : -1) * (st.h > 0.0 ? +1 : -1);
                bool pass = spec.direction == EventDirection::Any
                         || (spec.direction == EventDirection::Increasing && dir > 0)
                         || (spec.direction == EventDirection::Decreasing && dir < 0);
                double t_ev = st.t + th * st.h;
                bool inside = traj.forward() ? (t_ev <= traj.t_final) : (t_ev >= traj.t_final);
                if (pass && inside) out.push_back({0, t_ev, xyz(d.eval(th)), dir});
            }
            ga = gb;
            th_a = th_b;
        }
    }
    return out;
}

ClosestPoint closest_approach(const Trajectory& traj, const Vec3& target, double t_lo, double t_hi) {
    auto dist = [&](double t) { return norm(traj.state_at(t) - target); };
    // golden-section refinement seeded by a coarse scan
    const int NS = 64;
    double best_t = t_lo, best_d = dist(t_lo);
    for (int i = 1; i <= NS; ++i) {
        double t = t_lo + (t_hi - t_lo) * i / NS;
        double d = dist(t);
        if (d < best_d) {
            best_d = d;
            best_t = t;
        }
    }
    double span = (t_hi - t_lo) / NS;
    double a = best_t - span, b = best_t + span;
    if ((t_hi > t_lo && a < t_lo) || (t_hi < t_lo && a > t_lo)) a = t_lo;
    if ((t_hi > t_lo && b > t_hi) || (t_hi < t_lo && b < t_hi)) b = t_hi;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d2 = a + gr * (b - a);
    double fc = dist(c), fd = dist(d2);
    for (int it = 0; it < 80 && std::fabs(b - a) > 1e-14 * std::max(1.0, std::fabs(a)); ++it) {
        if (fc < fd) {
            b = d2;
            d2 = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d2;
            fc = fd;
            d2 = a + gr * (b - a);
            fd = dist(d2);
        }
    }
    double t_min = 0.5 * (a + b);
    return {t_min, traj.state_at(t_min), dist(t_min)};
}

namespace {

// shared transport driver: integrates (x, v) with v' = M(x) v where M is the
// Jacobian or its negated transpose, re-tracing the trajectory's time span
TransportResult transport_impl(const Params& p, const Trajectory& traj, const Vec3& v0,
                               bool adjoint) {
    const double sigma = traj.forward() ? 1.0 : -1.0;
    auto rhs = [&p, sigma, adjoint](double, const Arr<6>& y, Arr<6>& dy) {
        Vec3 x{y[0], y[1], y[2]}, v{y[3], y[4], y[5]};
        Vec3 f = eval_field(p, x);
        Mat3 J = eval_jacobian(p, x);
        Vec3 dv = adjoint ? -1.0 * (transpose(J) * v) : J * v;
        dy[0] = sigma * f.x;
        dy[1] = sigma * f.y;
        dy[2] = sigma * f.z;
        dy[3] = sigma * dv.x;
        dy[4] = sigma * dv.y;
        dy[5] = sigma * dv.z;
    };
    Stepper<6, decltype(rhs)> stepper{rhs, 1e-10, 1e-12};

    const double T = traj.duration();
    Arr<6> y{traj.initial_state.x, traj.initial_state.y, traj.initial_state.z, v0.x, v0.y, v0.z};
    double s = 0.0;
    rhs(s, y, stepper.k1);
    double h = std::min(0.25, std::max(T * 1e-4, 1e-8));

    TransportResult out;
    out.path.push_back({traj.t0, v0});
    while (s < T) {
        if (s + h > T) h = T - s;
        if (h < 1e-14 * std::max(1.0, s))
            raise(errc::step_size_underflow, "tangent transport step underflow");
        Arr<6> y_new;
        double err = stepper.attempt(s, y, h, y_new);
        if (!std::isfinite(err)) {
            h *= 0.1;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.9 * std::pow(err, -0.2), 0.1);
            continue;
        }
        s += h;
        y = y_new;
        stepper.k1 = stepper.k7;
        out.path.push_back({traj.t0 + sigma * s, {y[3], y[4], y[5]}});
        h = std::min(0.25, h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 10.0));
    }
    out.final_vector = {y[3], y[4], y[5]};
    return out;
}

}  // namespace

TransportResult transport_tangent(const Params& p, const Trajectory& traj, const Vec3& v0) {
    return transport_impl(p, traj, v0, false);
}

TransportResult transport_adjoint(const Params& p, const Trajectory& traj, const Vec3& w0) {
    return transport_impl(p, traj, w0, true);
}

TangentAtSphere transport_tangent_to_sphere(const Params& p, const Vec3& x0, const Vec3& v0,
                                            double radius, double arm_radius, double t_max,
                                            TimeDirection dir) {
    const double sigma = dir == TimeDirection::Forward ? 1.0 : -1.0;
    auto rhs = [&p, sigma](double, const Arr<6>& y, Arr<6>& dy) {
        Vec3 x{y[0], y[1], y[2]}, v{y[3], y[4], y[5]};
        Vec3 f = eval_field(p, x);
        Vec3 dv = eval_jacobian(p, x) * v;
        dy[0] = sigma * f.x;
        dy[1] = sigma * f.y;
        dy[2] = sigma * f.z;
        dy[3] = sigma * dv.x;
        dy[4] = sigma * dv.y;
        dy[5] = sigma * dv.z;
    };
    Stepper<6, decltype(rhs)> stepper{rhs, 1e-11, 1e-13};

    Arr<6> y{x0.x, x0.y, x0.z, v0.x, v0.y, v0.z};
    double s = 0.0;
    rhs(s, y, stepper.k1);
    double h = 1e-4;
    bool armed = false;

    auto radius_of = [](const Arr<6>& yy) {
        return std::sqrt(yy[0] * yy[0] + yy[1] * yy[1] + yy[2] * yy[2]);
    };

    TangentAtSphere out;
    while (s < t_max) {
        if (h < 1e-14 * std::max(1.0, s)) break;
        Arr<6> y_new;
        double err = stepper.attempt(s, y, h, y_new);
        if (!std::isfinite(err)) {
            h *= 0.1;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.9 * std::pow(err, -0.2), 0.1);
            continue;
        }
        double r_old = radius_of(y), r_new = radius_of(y_new);
        if (!armed && r_new > arm_radius) armed = true;
        if (armed && r_old > radius && r_new <= radius) {
            // bisect the crossing by re-integrating partial steps from y
            Arr<6> base = y;
            double lo = 0.0, hi = h;
            for (int it = 0; it < 50 && hi - lo > 1e-14 * h; ++it) {
                double mid = 0.5 * (lo + hi);
                // single RK step pair to mid via the stepper (re-seeded)
                Stepper<6, decltype(rhs)> sub{rhs, 1e-11, 1e-13};
                Arr<6> yy = base;
                double ss = 0.0;
                rhs(ss, yy, sub.k1);
                double hh = mid / 8.0 + 1e-18;
                while (ss < mid) {
                    if (ss + hh > mid) hh = mid - ss;
                    Arr<6> yn;
                    double e2 = sub.attempt(ss, yy, hh, yn);
                    if (std::isfinite(e2) && e2 <= 1.0) {
                        ss += hh;
                        yy = yn;
                        sub.k1 = sub.k7;
                        hh *= std::clamp(0.9 * std::pow(std::max(e2, 1e-10), -0.2), 0.2, 5.0);
                    } else {
                        hh *= 0.5;
                        if (hh < 1e-16) break;
                    }
                }
                if (radius_of(yy) > radius)
                    lo = mid;
                else
                    hi = mid;
            }
            Stepper<6, decltype(rhs)> sub{rhs, 1e-11, 1e-13};
            Arr<6> yy = base;
            double ss = 0.0, target = 0.5 * (lo + hi);
            rhs(ss, yy, sub.k1);
            double hh = target / 8.0 + 1e-18;
            while (ss < target) {
                if (ss + hh > target) hh = target - ss;
                Arr<6> yn;
                double e2 = sub.attempt(ss, yy, hh, yn);
                if (std::isfinite(e2) && e2 <= 1.0) {
                    ss += hh;
                    yy = yn;
                    sub.k1 = sub.k7;
                    hh *= std::clamp(0.9 * std::pow(std::max(e2, 1e-10), -0.2), 0.2, 5.0);
                } else {
                    hh *= 0.5;
                    if (hh < 1e-16) break;
                }
            }
            out.state = {yy[0], yy[1], yy[2]};
            out.tangent = {yy[3], yy[4], yy[5]};
            out.t = s + target;
            out.hit = true;
            return out;
        }
        s += h;
        y = y_new;
        stepper.k1 = stepper.k7;
        h = std::min(0.25, h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 10.0));
    }
    out.state = {y[0], y[1], y[2]};
    out.tangent = {y[3], y[4], y[5]};
    out.t = s;
    out.hit = false;
    return out;
}

FrameTransport transport_frame(const Params& p, const State& s0, double T, double rel_tol,
                               double abs_tol) {
    const double sigma = T >= 0.0 ? 1.0 : -1.0;
    const double Tabs = std::fabs(T);
    // state, three frame columns, trace integral
    auto rhs = [&p, sigma](double, const Arr<13>& y, Arr<13>& dy) {
        Vec3 x{y[0], y[1], y[2]};
        Vec3 f = eval_field(p, x);
        Mat3 J = eval_jacobian(p, x);
        dy[0] = sigma * f.x;
        dy[1] = sigma * f.y;
        dy[2] = sigma * f.z;
        for (int c = 0; c < 3; ++c) {
            Vec3 v{y[3 + 3 * c], y[4 + 3 * c], y[5 + 3 * c]};
            Vec3 dv = J * v;
            dy[3 + 3 * c] = sigma * dv.x;
            dy[4 + 3 * c] = sigma * dv.y;
            dy[5 + 3 * c] = sigma * dv.z;
        }
        dy[12] = sigma * trace(J);
    };
    Stepper<13, decltype(rhs)> stepper{rhs, rel_tol, abs_tol};

    Arr<13> y{};
    y[0] = s0.x;
    y[1] = s0.y;
    y[2] = s0.z;
    y[3] = y[7] = y[11] = 1.0;  // identity columns
    double s = 0.0;
    rhs(s, y, stepper.k1);
    double h = std::min(0.25, std::max(Tabs * 1e-4, 1e-8));

    while (s < Tabs) {
        if (s + h > Tabs) h = Tabs - s;
        if (h < 1e-14 * std::max(1.0, s))
            raise(errc::step_size_underflow, "frame transport step underflow");
        Arr<13> y_new;
        double err = stepper.attempt(s, y, h, y_new);
        if (!std::isfinite(err)) {
            h *= 0.1;
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.9 * std::pow(err, -0.2), 0.1);
            continue;
        }
        s += h;
        y = y_new;
        stepper.k1 = stepper.k7;
        h = std::min(0.25, h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 10.0));
    }

    FrameTransport out;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r) out.Phi(r, c) = y[3 + 3 * c + r];
    out.trace_integral = y[12];
    out.final_state = {y[0], y[1], y[2]};
    return out;
}

}  // namespace flip
