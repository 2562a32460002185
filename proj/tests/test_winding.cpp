#include <cmath>
#include <random>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flip/csv.hpp"
#include "flip/error.hpp"
#include "flip/flow.hpp"
#include "flip/winding.hpp"

using namespace flip;

TEST_CASE("winding values in the reference regions") {
    WindingResult r1 = compute_zeta(Params::reference(0.5, 0.001));
    CHECK(!r1.saturated);
    CHECK(r1.zeta == 1);
    CHECK(r1.termination == ZetaTermination::ReachedBoundary);

    WindingResult r2 = compute_zeta(Params::reference(0.5, -0.001));
    CHECK(!r2.saturated);
    CHECK(r2.zeta == 2);

    WindingResult r3 = compute_zeta(Params::reference(0.2, -0.001));
    CHECK(r3.saturated);

    // region 1 far from the locus
    WindingResult r4 = compute_zeta(Params::reference(0.2, 0.05));
    CHECK(r4.zeta == 1);
}

TEST_CASE("crossing parity is even whenever the boundary is reached") {
    for (double mu : {0.001, -0.001, -0.0035, -0.0045}) {
        WindingResult r = compute_zeta(Params::reference(0.5, mu));
        REQUIRE(r.termination == ZetaTermination::ReachedBoundary);
        CHECK(r.crossing_count % 2 == 0);
        CHECK(r.zeta == r.crossing_count / 2);
    }
}

TEST_CASE("the quadrant V is positively invariant after entry") {
    Params p = Params::reference(0.5, -0.001);
    Trajectory traced;
    WindingConfig wc;
    compute_zeta_traced(p, wc, traced);
    REQUIRE(traced.termination == Termination::Event);
    // continue for ten more time units; both coordinates stay non-positive
    IntegratorConfig cfg;
    cfg.t_max = 10.0;
    cfg.r_escape = 1e9;
    Trajectory cont = integrate(p, traced.final_state, cfg, {});
    for (const auto& s : cont.samples) {
        CHECK(s.state.x <= 1e-8);
        CHECK(s.state.y <= 1e-8);
    }
}

TEST_CASE("zeta is constant across a plateau") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> umu(-2.7e-3, -2.0e-4);
    for (int i = 0; i < 20; ++i) {
        WindingResult r = compute_zeta(Params::reference(0.5, umu(rng)));
        CHECK(r.zeta == 2);
    }
}

TEST_CASE("plateau boundary sits at the first cascade cluster") {
    // the 2 -> 3 transition lies within 1e-4 of -2.880268e-3
    WindingResult above = compute_zeta(Params::reference(0.5, -2.880268e-3 + 1e-4));
    WindingResult below = compute_zeta(Params::reference(0.5, -2.880268e-3 - 1e-4));
    CHECK(above.zeta == 2);
    CHECK(below.zeta == 3);
}

TEST_CASE("degenerate one-cell sweep equals the pointwise computation") {
    Params base = Params::reference(0.0, 0.0);
    SweepSpec spec;
    spec.alpha_min = spec.alpha_max = 0.5;
    spec.mu_min = spec.mu_max = 0.001;
    spec.n_alpha = spec.n_mu = 1;
    SweepGrid grid = sweep_zeta(base, spec);
    REQUIRE(grid.cells.size() == 1);
    WindingResult direct = compute_zeta(Params::reference(0.5, 0.001));
    CHECK(grid.cells[0].zeta == direct.zeta);
    CHECK(grid.cells[0].crossing_count == direct.crossing_count);
}

TEST_CASE("sweep output is independent of the worker count") {
    Params base = Params::reference(0.0, 0.0);
    SweepSpec spec;
    spec.alpha_min = 0.45;
    spec.alpha_max = 0.55;
    spec.mu_min = -0.002;
    spec.mu_max = 0.001;
    spec.n_alpha = 4;
    spec.n_mu = 4;

    spec.workers = 1;
    SweepGrid a = sweep_zeta(base, spec);
    spec.workers = 3;
    SweepGrid b = sweep_zeta(base, spec);

    write_sweep_csv("sweep_a.csv", a);
    write_sweep_csv("sweep_b.csv", b);
    std::ifstream fa("sweep_a.csv"), fb("sweep_b.csv");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("alpha,mu,zeta,crossings,termination\n", 0) == 0);
}

TEST_CASE("inverted sweep ranges are rejected") {
    Params base = Params::reference(0.0, 0.0);
    SweepSpec spec;
    spec.alpha_min = 0.7;
    spec.alpha_max = 0.3;
    spec.mu_min = 0.0;
    spec.mu_max = 0.0;
    CHECK_THROWS_AS((void)sweep_zeta(base, spec), Error);
}
