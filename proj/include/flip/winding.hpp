#ifndef FLIP_WINDING_HPP
#define FLIP_WINDING_HPP

#include <string>
#include <vector>

#include "flip/flow.hpp"
#include "flip/model.hpp"

namespace flip {

enum class ZetaTermination { ReachedBoundary, TimeLimit, CrossingCap, Failed };

const char* zeta_termination_name(ZetaTermination t);

// Winding number of the positive branch of W^u(0) around W^ss(q), counted as
// Sigma-plane crossings divided by two. A saturated result means the
// trajectory never reached the invariant quadrant V within the caps.
struct WindingResult {
    bool saturated = false;
    int zeta = -1;  // valid only when !saturated && termination == ReachedBoundary
    int crossing_count = 0;
    ZetaTermination termination = ZetaTermination::Failed;
    Vec3 final_state;
    double total_time = 0.0;
    std::string error;  // non-empty when termination == Failed
};

struct WindingConfig {
    double seed_offset = 1e-7;
    int max_crossings = 200;
    double t_max = 5000.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

WindingResult compute_zeta(const Params& p, const WindingConfig& wc = {});

// Same computation but with the trajectory retained (dense + samples), for
// diagnostics and seed harvesting.
WindingResult compute_zeta_traced(const Params& p, const WindingConfig& wc, Trajectory& out);

struct SweepSpec {
    double alpha_min = 0.0, alpha_max = 0.0;
    double mu_min = 0.0, mu_max = 0.0;
    int n_alpha = 1, n_mu = 1;
    int workers = 1;
};

struct SweepGrid {
    SweepSpec spec;
    std::vector<double> alphas;
    std::vector<double> mus;
    std::vector<WindingResult> cells;  // row-major, index = ia * n_mu + imu

    const WindingResult& cell(int ia, int imu) const { return cells[ia * spec.n_mu + imu]; }
};

// Per-cell failures are recorded in the cell, never abort the sweep. The
// raster is assembled by index, so the result is independent of worker count
// and evaluation order.
SweepGrid sweep_zeta(const Params& base, const SweepSpec& spec, const WindingConfig& wc = {});

}  // namespace flip

#endif
