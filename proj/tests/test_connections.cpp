#include <cmath>
#include <vector>

#include "doctest.h"
#include "flip/connections.hpp"
#include "flip/error.hpp"
#include "flip/model.hpp"
#include "flip/orbits.hpp"

using namespace flip;

TEST_CASE("the split vanishes on the primary homoclinic locus") {
    for (int k = 0; k < 9; ++k) {
        double alpha = 0.2 + 0.4 * k / 8.0;
        GapMeasurement g = homoclinic_split(Params::reference(alpha, 0.0));
        CHECK(std::fabs(g.value) <= 1e-8);
        CHECK(!g.via_fallback);
    }
}

TEST_CASE("the split changes sign across the locus") {
    GapMeasurement above = homoclinic_split(Params::reference(0.5, 0.001));
    GapMeasurement below = homoclinic_split(Params::reference(0.5, -0.001));
    CHECK(above.value < 0.0);
    CHECK(below.value > 0.0);
    // near the locus the measurement is linear in mu
    GapMeasurement tiny = homoclinic_split(Params::reference(0.5, 1e-7));
    CHECK(tiny.value < 0.0);
    CHECK(std::fabs(tiny.value) < 1e-3);
}

TEST_CASE("split bisection pins the locus to 1e-7") {
    for (double alpha : {0.2, 0.35, 0.5}) {
        Params base = Params::reference(alpha, 0.0);
        BifurcationPoint pt = locate_bifurcation(base, -1e-3, 1e-3, Detector::Split, "H", 1e-8);
        CHECK(std::fabs(pt.mu) <= 1e-7);
    }
}

TEST_CASE("far parameters without a close return raise or fall back") {
    // deep in region 2 the branch spirals into the focus without a close return
    CHECK_THROWS_AS((void)homoclinic_split(Params::reference(0.2, -0.05)), Error);
}

TEST_CASE("zeta-change locates the two-loop homoclinic point") {
    Params base = Params::reference(0.5, 0.0);
    BifurcationPoint pt =
        locate_bifurcation(base, -4.0e-3, -1.0e-3, Detector::ZetaChange, "2H_t", 3e-9);
    CHECK(std::fabs(pt.mu - (-2.880268e-3)) <= 1e-5);
    // the winding number changes by one across the located point
    WindingResult above = compute_zeta(Params::reference(0.5, pt.mu + 5e-6));
    WindingResult below = compute_zeta(Params::reference(0.5, pt.mu - 5e-6));
    CHECK(above.zeta == 2);
    CHECK(below.zeta == 3);
}

TEST_CASE("split bisection locates the cascade homoclinic points with loop counts") {
    Params base = Params::reference(0.5, 0.0);
    BifurcationPoint h2 =
        locate_bifurcation(base, -4.0e-3, -3.7e-3, Detector::Split, "H_t[2Go]", 1e-8);
    CHECK(std::fabs(h2.mu - (-3.816057e-3)) <= 1e-5);
    attach_rotation_counts(base, h2);
    CHECK(h2.loops_gamma_o == 2);
    CHECK(h2.loops_gamma_t == 0);
    // winding plateau consistency: n equals the plateau value minus one
    WindingResult plateau = compute_zeta(Params::reference(0.5, h2.mu + 1e-5));
    CHECK(plateau.zeta - 1 == h2.loops_gamma_o);
}

TEST_CASE("heteroclinic gap brackets the third cluster connection") {
    Params base = Params::reference(0.5, 0.0);
    BifurcationPoint q3 = locate_bifurcation(base, -4.30e-3, -4.20e-3, Detector::GapGammaT,
                                             "Q0_Gt[3Go]", 1e-8);
    CHECK(std::fabs(q3.mu - (-4.249668e-3)) <= 1e-5);
}

TEST_CASE("gap guards fire away from the connection") {
    // target orbit exists, but the branch stays far from it at these parameters
    Params at = Params::reference(0.5, -2.5e-3);
    PeriodicOrbit gt = find_primary_orbit(at, false);
    CHECK_THROWS_AS((void)hetero_gap(at, gt), Error);
}

TEST_CASE("homoclinic cascade accumulates on both sides of the heteroclinic point") {
    Params base = Params::reference(0.5, 0.0);
    BifurcationPoint q1 = locate_bifurcation(base, -2.92e-3, -2.84e-3, Detector::GapGammaT,
                                             "Q0_Gt[1Go]", 1e-8);
    CHECK(std::fabs(q1.mu - (-2.880324e-3)) <= 2e-5);

    // split sign changes within ten final brackets on each side
    double window = 10.0 * std::max(q1.bracket, 1e-8);
    auto count_changes = [&](double from, double to) {
        int changes = 0;
        double prev = 0.0;
        bool have_prev = false;
        for (int k = 0; k <= 40; ++k) {
            double mu = from + (to - from) * k / 40.0;
            try {
                double v = homoclinic_split(Params::reference(0.5, mu)).value;
                if (have_prev && (v > 0.0) != (prev > 0.0)) changes++;
                prev = v;
                have_prev = true;
            } catch (const Error&) {
            }
        }
        return changes;
    };
    CHECK(count_changes(q1.mu - window, q1.mu) >= 3);
    CHECK(count_changes(q1.mu, q1.mu + window) >= 3);
}

TEST_CASE("orientation index separates the two closure types") {
    CHECK(orientation_index(Params::reference(0.2, 0.0)) == 1.0);
    CHECK(orientation_index(Params::reference(0.5, 0.0)) == -1.0);
    // magnitude is unit and stable under halving the truncation radius
    CHECK(std::fabs(orientation_index(Params::reference(0.2, 0.0), 0.025)) == 1.0);
    CHECK(std::fabs(orientation_index(Params::reference(0.5, 0.0), 0.025)) == 1.0);
    CHECK(orientation_index(Params::reference(0.2, 0.0), 0.025) == 1.0);
    CHECK(orientation_index(Params::reference(0.5, 0.0), 0.025) == -1.0);
}

TEST_CASE("orientation index requires the homoclinic locus") {
    CHECK_THROWS_AS((void)orientation_index(Params::reference(0.5, 0.01)), Error);
}

TEST_CASE("inclination flip location is bracket independent") {
    Params base = Params::reference(0.5, 0.0);
    BifurcationPoint wide = locate_inclination_flip(base, 0.2, 0.5, 1e-7);
    BifurcationPoint narrow = locate_inclination_flip(base, 0.36, 0.38, 1e-7);
    CHECK(std::fabs(wide.alpha - narrow.alpha) <= 1e-6);
    CHECK(std::fabs(wide.alpha - 0.3694818) <= 1e-3);
    REQUIRE(wide.case_report.has_value());
    CHECK(wide.case_report->case_c);
    CHECK_THROWS_AS((void)locate_inclination_flip(base, 0.4, 0.5), Error);
}

TEST_CASE("family crossing counts vanish past the last tangency") {
    // just above the tangency of the orbit manifolds the count is positive,
    // past it the family no longer crosses the stable set
    int before = tangency_detector_count(Params::reference(0.5, -7.06e-3), false);
    int after = tangency_detector_count(Params::reference(0.5, -7.09e-3), false);
    CHECK(before > 0);
    CHECK(after == 0);

    // same structure for the fold of the origin connection
    int f_before = tangency_detector_count(Params::reference(0.5, -7.03e-3), true);
    int f_after = tangency_detector_count(Params::reference(0.5, -7.07e-3), true);
    CHECK(f_before > 0);
    CHECK(f_after == 0);
}

TEST_CASE("polyline crossing counter on synthetic traces") {
    // two transversally crossing polylines in the section plane y = 0
    Params p = Params::reference(0.5, -0.002);
    SectionPlane sec = SectionPlane::default_section();
    ManifoldPatch a, b;
    a.dimension = b.dimension = 2;
    IntegratorConfig cfg;
    cfg.t_max = 1e-3;
    // patches are only containers here; build traces through the public API
    // by synthesizing one-segment trajectories is impractical, so exercise the
    // guard paths instead and the real-count path via the family detector
    CHECK_THROWS_AS((void)tangency_count(p, a, a, sec), Error);  // self comparison
    CHECK_THROWS_AS((void)tangency_count(p, a, b, sec), Error);  // empty traces
}
