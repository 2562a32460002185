#include "flip/winding.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "flip/error.hpp"

namespace flip {

const char* zeta_termination_name(ZetaTermination t) {
    switch (t) {
        case ZetaTermination::ReachedBoundary: return "reached-boundary";
        case ZetaTermination::TimeLimit: return "time-limit";
        case ZetaTermination::CrossingCap: return "crossing-cap";
        case ZetaTermination::Failed: return "failed";
    }
    return "failed";
}

namespace {

WindingResult compute_zeta_impl(const Params& p, const WindingConfig& wc, Trajectory* keep) {
    EigenData eig = origin_eigens(p);
    Equilibrium q = find_q(p);

    Vec3 seed = wc.seed_offset * eig.e_u;
    if (eval_field(p, seed).x < 0.0) seed = -1.0 * seed;  // positive-x branch

    std::vector<EventSpec> events;
    events.push_back(EventSpec::plane({1, 0, 0}, q.location.x, EventDirection::Any,
                                      EventAction::Record, wc.max_crossings));
    events.push_back(EventSpec::half_space_entry());

    IntegratorConfig cfg;
    cfg.rel_tol = wc.rel_tol;
    cfg.abs_tol = wc.abs_tol;
    cfg.t_max = wc.t_max;
    cfg.store_dense = keep != nullptr;
    cfg.store_samples = keep != nullptr;

    Trajectory traj = integrate(p, seed, cfg, events);

    WindingResult r;
    r.final_state = traj.final_state;
    r.total_time = traj.t_final - traj.t0;
    for (const EventRecord& ev : traj.events)
        if (ev.event_id == 0) r.crossing_count++;

    switch (traj.termination) {
        case Termination::Event:  // entered V
            if (r.crossing_count % 2 != 0)
                raise(errc::odd_crossing_count, "odd Sigma crossing count at boundary entry");
            r.termination = ZetaTermination::ReachedBoundary;
            r.zeta = r.crossing_count / 2;
            break;
        case Termination::EventCap:
            r.termination = ZetaTermination::CrossingCap;
            r.saturated = true;
            break;
        case Termination::TimeLimit:
            r.termination = ZetaTermination::TimeLimit;
            r.saturated = true;
            break;
        default:
            r.termination = ZetaTermination::Failed;
            r.error = "unexpected termination of the W^u(0) trajectory";
            break;
    }
    if (keep) *keep = std::move(traj);
    return r;
}

}  // namespace

WindingResult compute_zeta(const Params& p, const WindingConfig& wc) {
    return compute_zeta_impl(p, wc, nullptr);
}

WindingResult compute_zeta_traced(const Params& p, const WindingConfig& wc, Trajectory& out) {
    return compute_zeta_impl(p, wc, &out);
}

SweepGrid sweep_zeta(const Params& base, const SweepSpec& spec, const WindingConfig& wc) {
    if (spec.n_alpha < 1 || spec.n_mu < 1) raise(errc::invalid_argument, "grid must be at least 1x1");
    if (spec.alpha_min > spec.alpha_max || spec.mu_min > spec.mu_max)
        raise(errc::invalid_argument, "inverted sweep range");

    SweepGrid grid;
    grid.spec = spec;
    for (int i = 0; i < spec.n_alpha; ++i)
        grid.alphas.push_back(spec.n_alpha == 1
                                  ? spec.alpha_min
                                  : spec.alpha_min + i * (spec.alpha_max - spec.alpha_min) / (spec.n_alpha - 1));
    for (int j = 0; j < spec.n_mu; ++j)
        grid.mus.push_back(spec.n_mu == 1
                               ? spec.mu_min
                               : spec.mu_min + j * (spec.mu_max - spec.mu_min) / (spec.n_mu - 1));

    const int total = spec.n_alpha * spec.n_mu;
    grid.cells.resize(total);

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int idx = next.fetch_add(1);
            if (idx >= total) return;
            int ia = idx / spec.n_mu;
            int imu = idx % spec.n_mu;
            Params p = base;
            p.alpha = grid.alphas[ia];
            p.mu = grid.mus[imu];
            try {
                grid.cells[idx] = compute_zeta(p, wc);
            } catch (const Error& e) {
                WindingResult r;
                r.termination = ZetaTermination::Failed;
                r.error = e.what();
                grid.cells[idx] = r;
            }
        }
    };

    int nw = std::max(1, spec.workers);
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return grid;
}

}  // namespace flip
