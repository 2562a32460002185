#include <cmath>

#include "doctest.h"
#include "flip/error.hpp"
#include "flip/model.hpp"
#include "flip/orbits.hpp"

using namespace flip;

TEST_CASE("orientable orbit in region 1 has real positive multipliers") {
    Params p = Params::reference(0.5, 0.001);
    PeriodicOrbit go = find_primary_orbit(p, true);
    CHECK(go.orientability == Orientability::Orientable);
    CHECK(go.L1.imag() == 0.0);
    CHECK(go.L1.real() > 0.0);
    CHECK(go.L1.real() < 1.0);
    CHECK(go.L2.real() > 1.0);
    CHECK(go.loop_count == 1);
    CHECK(go.period > 0.0);
}

TEST_CASE("twisted orbit in region 3 has real negative multipliers") {
    Params p = Params::reference(0.5, -0.002);
    PeriodicOrbit gt = find_primary_orbit(p, false);
    CHECK(gt.orientability == Orientability::Nonorientable);
    CHECK(gt.L2.real() < -1.0);
    CHECK(gt.L1.real() < 0.0);
    CHECK(gt.L1.real() > -1.0);

    PeriodicOrbit go = find_primary_orbit(p, true);
    CHECK(go.orientability == Orientability::Orientable);
    // the two primary orbits are well separated in phase space
    CHECK(norm(go.fixed_point - gt.fixed_point) > 0.2);
}

TEST_CASE("floquet structure of accepted orbits") {
    Params p = Params::reference(0.5, -0.002);
    for (bool orientable : {true, false}) {
        PeriodicOrbit o = find_primary_orbit(p, orientable);

        // trivial multiplier: the monodromy fixes the flow direction
        Vec3 f = eval_field(p, o.fixed_point);
        CHECK(norm(o.monodromy * f - f) <= 1e-6 * norm(f));

        // volume identity
        double d = det(o.monodromy);
        double liouville = std::exp(o.trace_integral);
        CHECK(std::fabs(d - liouville) <= 1e-6 * std::fabs(liouville));

        // multiplier product equals the nontrivial part of the determinant
        double prod = (o.L1 * o.L2).real();
        CHECK(std::fabs(prod - d) <= 1e-6 * std::max(std::fabs(d), 1e-12));

        // section transversality
        CHECK(std::fabs(dot(normalized(o.section.normal), f)) >= 1e-6);
    }
}

TEST_CASE("continuation over a quiet stretch keeps the orientability") {
    Params p = Params::reference(0.5, -0.002);
    PeriodicOrbit go = find_primary_orbit(p, true);
    ContinuationResult res = continue_orbit(p, go, -3.0e-3);
    CHECK(!res.hit_fold);
    REQUIRE(res.branch.size() >= 3);
    double prev = go.L2.real();
    for (const auto& [mu, o] : res.branch) {
        CHECK(o.orientability == Orientability::Orientable);
        // multipliers vary continuously along the march
        CHECK(std::fabs(o.L2.real() - prev) < 0.5 * std::max(1.0, std::fabs(prev)));
        prev = o.L2.real();
    }
}

TEST_CASE("attracting orbit exists between the fold and the doubling") {
    Params p = Params::reference(0.5, -7.3e-3);
    PeriodicOrbit ga = find_attracting_orbit(p);
    CHECK(std::abs(ga.L1) < 1.0);
    CHECK(std::abs(ga.L2) < 1.0);
    CHECK(ga.loop_count == 1);
}

TEST_CASE("period doubling of the twisted orbit matches the slice value") {
    Params base = Params::reference(0.5, 0.0);
    Params easy = Params::reference(0.5, -7.3e-3);
    PeriodicOrbit ga = find_attracting_orbit(easy);
    OrbitBranch branch(base, ga, -7.3e-3);
    double mu = detect_multiplier_event(branch, MultiplierTarget::MinusOne, -7.30e-3, -7.10e-3);
    CHECK(std::fabs(mu - (-7.211185e-3)) <= 2e-5);
}

TEST_CASE("doubled orbit branches off with twice the period") {
    Params p = Params::reference(0.5, -7.19e-3);  // above the primary doubling
    PeriodicOrbit ga = find_attracting_orbit(p);
    REQUIRE(ga.loop_count == 2);  // the attractor is already the doubled orbit here
    CHECK(std::fabs(ga.period - 2.0 * 10.5) < 2.0);
}

TEST_CASE("doubling cascade values are monotone along the slice") {
    // PD points of the 1-, 2-, 4- and 8-loop twisted orbits, each located by
    // bisection from the attracting window where the orbit is born
    Params base = Params::reference(0.5, 0.0);
    double pd[4];
    struct Window {
        double mu_seed, lo, hi;
    };
    const Window windows[4] = {
        {-7.30e-3, -7.30e-3, -7.17e-3},   // 1-loop
        {-7.19e-3, -7.19e-3, -7.15e-3},   // 2-loop
        {-7.158e-3, -7.158e-3, -7.14e-3}, // 4-loop
        {-7.152e-3, -7.152e-3, -7.145e-3}, // 8-loop
    };
    for (int k = 0; k < 4; ++k) {
        Params easy = Params::reference(0.5, windows[k].mu_seed);
        PeriodicOrbit seed = find_attracting_orbit(easy);
        REQUIRE(seed.loop_count == (1 << k));
        OrbitBranch branch(base, seed, windows[k].mu_seed);
        pd[k] = detect_multiplier_event(branch, MultiplierTarget::MinusOne, windows[k].lo,
                                        windows[k].hi, 1e-7);
    }
    // deeper doublings happen at larger mu
    CHECK(pd[0] < pd[1]);
    CHECK(pd[1] < pd[2]);
    CHECK(pd[2] < pd[3]);
    CHECK(std::fabs(pd[0] - (-7.211185e-3)) <= 2e-5);
    CHECK(std::fabs(pd[1] - (-7.163762e-3)) <= 1e-4);
    CHECK(std::fabs(pd[2] - (-7.153300e-3)) <= 1e-4);
    CHECK(std::fabs(pd[3] - (-7.151054e-3)) <= 1e-4);
}

TEST_CASE("returns collapse to a constant on an attracting orbit") {
    Params p = Params::reference(0.5, -7.3e-3);
    PeriodicOrbit ga = find_attracting_orbit(p);
    CHECK_THROWS_AS(
        (void)collect_returns(p, ga.fixed_point + Vec3{1e-4, 0, 0}, SectionPlane::default_section(), 50),
        Error);
}

TEST_CASE("insufficient returns are reported") {
    Params p = Params::reference(0.5, 0.001);
    // a trajectory that leaves immediately cannot produce hundreds of returns
    CHECK_THROWS_AS(
        (void)collect_returns(p, {0.5, 0.3, 0.02}, SectionPlane::default_section(), 300, 200, 200.0),
        Error);
}

TEST_CASE("no-return and missing orbits raise the matching errors") {
    Params p = Params::reference(0.5, 0.001);
    CHECK_THROWS_AS((void)section_return(p, SectionPlane::default_section(), {0.5, 0.0, 0.3}, 1, 50.0),
                    Error);
    // only the orientable orbit exists in region 1
    CHECK_THROWS_AS((void)find_primary_orbit(p, false), Error);
}
