#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "flipscope.h"

namespace {

fs_params* reference_params(double alpha, double mu) {
    fs_params* p = fs_params_create();
    fs_params_set(p, "alpha", alpha);
    fs_params_set(p, "mu", mu);
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("parameter handles round-trip and validate keys") {
    fs_params* p = fs_params_create();
    double v = 0.0;
    CHECK(fs_params_get(p, "a", &v) == FS_OK);
    CHECK(v == doctest::Approx(0.7));
    CHECK(fs_params_set(p, "alpha", 0.5) == FS_OK);
    CHECK(fs_params_get(p, "alpha", &v) == FS_OK);
    CHECK(v == 0.5);
    CHECK(fs_params_set(p, "bogus", 1.0) == FS_ERR_INVALID_ARGUMENT);
    CHECK(std::strlen(fs_last_error()) > 0);
    fs_params_destroy(p);
}

TEST_CASE("alpha and mu must be set before computing") {
    fs_params* p = fs_params_create();
    double s[3] = {0, 0, 0}, f[3];
    CHECK(fs_eval_field(p, s, f) == FS_ERR_INVALID_ARGUMENT);
    fs_params_destroy(p);
}

TEST_CASE("field and eigen structure through the C surface") {
    fs_params* p = reference_params(0.5, 0.0);
    double s[3] = {0.1, 0.1, 0.1}, f[3];
    REQUIRE(fs_eval_field(p, s, f) == FS_OK);
    CHECK(f[0] == doctest::Approx(0.1545).epsilon(1e-14));
    CHECK(f[2] == doctest::Approx(-0.1805).epsilon(1e-14));

    double J[9];
    REQUIRE(fs_eval_jacobian(p, s, J) == FS_OK);
    CHECK(J[1] == doctest::Approx(1.0));  // dP1/dy = b

    double lam[3], vecs[9];
    REQUIRE(fs_origin_eigens(p, lam, vecs) == FS_OK);
    CHECK(lam[0] == doctest::Approx(-2.0));
    CHECK(lam[1] == doctest::Approx(-0.3));
    CHECK(lam[2] == doctest::Approx(1.7));

    int resonance = -1, case_c = -1, weak = -1;
    REQUIRE(fs_classify_case(p, &resonance, &case_c, &weak) == FS_OK);
    CHECK(resonance == 0);
    CHECK(case_c == 1);
    fs_params_destroy(p);
}

TEST_CASE("equilibrium search and error codes") {
    fs_params* p = reference_params(0.5, 0.001);
    double guess[3] = {0.7, 0.2, 0.1}, loc[3];
    int stability = -1;
    REQUIRE(fs_find_equilibrium(p, guess, 1, loc, &stability) == FS_OK);
    CHECK(stability == 1);  // stable focus
    CHECK(loc[0] > 0.5);

    double origin_guess[3] = {1e-9, 0, 0};
    CHECK(fs_find_equilibrium(p, origin_guess, 1, loc, &stability) ==
          FS_ERR_CONVERGED_TO_ORIGIN);
    fs_params_destroy(p);
}

TEST_CASE("trajectory integration and CSV export") {
    fs_params* p = reference_params(0.5, 0.0);
    fs_integrator_options opts;
    fs_integrator_options_init(&opts);
    opts.t_max = 1.0;
    double s0[3] = {0, 0, 1};
    fs_trajectory* traj = nullptr;
    REQUIRE(fs_integrate(p, s0, &opts, &traj) == FS_OK);
    double fin[3], t_final = 0, arc = 0;
    REQUIRE(fs_trajectory_final(traj, fin, &t_final, &arc) == FS_OK);
    CHECK(std::fabs(fin[2] - std::exp(-2.0)) <= 1e-8);
    CHECK(t_final == doctest::Approx(1.0));

    REQUIRE(fs_trajectory_write_csv(traj, "capi_traj.csv") == FS_OK);
    std::string body = slurp("capi_traj.csv");
    CHECK(body.rfind("t,x,y,z,arclength\n", 0) == 0);
    fs_trajectory_destroy(traj);
    fs_params_destroy(p);
}

TEST_CASE("winding number through the C surface") {
    fs_params* p = reference_params(0.5, 0.001);
    int zeta = -99, crossings = -99;
    char term[32];
    REQUIRE(fs_compute_zeta(p, &zeta, &crossings, term, sizeof term) == FS_OK);
    CHECK(zeta == 1);
    CHECK(crossings == 2);
    CHECK(std::string(term) == "reached-boundary");
    fs_params_destroy(p);

    fs_params* sat = reference_params(0.2, -0.001);
    REQUIRE(fs_compute_zeta(sat, &zeta, &crossings, term, sizeof term) == FS_OK);
    CHECK(zeta == -1);
    fs_params_destroy(sat);
}

TEST_CASE("sweep raster CSV from the C surface") {
    fs_params* base = fs_params_create();
    REQUIRE(fs_sweep_zeta(base, 0.45, 0.55, -0.002, 0.001, 3, 3, 2, "capi_sweep.csv") == FS_OK);
    std::string body = slurp("capi_sweep.csv");
    CHECK(body.rfind("alpha,mu,zeta,crossings,termination\n", 0) == 0);
    int lines = 0;
    for (char c : body)
        if (c == '\n') lines++;
    CHECK(lines == 10);  // header + 9 cells
    fs_params_destroy(base);
}

TEST_CASE("orbit location and continuation through the C surface") {
    fs_params* p = reference_params(0.5, -0.002);
    fs_orbit* orbit = nullptr;
    REQUIRE(fs_find_primary_orbit(p, 0, &orbit) == FS_OK);  // twisted
    double fp[3], period = 0, mult[4];
    int orient = -1;
    REQUIRE(fs_orbit_info(orbit, fp, &period, mult, &orient) == FS_OK);
    CHECK(orient == 1);  // nonorientable
    CHECK(mult[2] < -1.0);
    CHECK(period > 0.0);

    double last_mu = 0;
    int hit_fold = -1;
    REQUIRE(fs_continue_orbit(p, orbit, -2.5e-3, "capi_branch.csv", &last_mu, &hit_fold) == FS_OK);
    CHECK(last_mu == doctest::Approx(-2.5e-3));
    CHECK(hit_fold == 0);
    std::string body = slurp("capi_branch.csv");
    CHECK(body.rfind("mu,period,fixed_x,fixed_z,re_L1,im_L1,re_L2,im_L2,orientability\n", 0) == 0);
    fs_orbit_destroy(orbit);
    fs_params_destroy(p);
}

TEST_CASE("manifold growth, sphere trace and projection through the C surface") {
    fs_params* p = reference_params(0.5, 0.0);
    fs_patch* patch = nullptr;
    REQUIRE(fs_grow_equilibrium_manifold(p, "strong-stable-1d", 4.0, 2, &patch) == FS_OK);
    REQUIRE(fs_patch_sphere_csv(patch, "capi_curves.csv") == FS_OK);
    std::string body = slurp("capi_curves.csv");
    CHECK(body.rfind("curve_id,seq,x,y,z\n", 0) == 0);

    REQUIRE(fs_project_curves_csv("capi_curves.csv", "capi_projected.csv") == FS_OK);
    std::string proj = slurp("capi_projected.csv");
    CHECK(proj.rfind("curve_id,seq,px,py\n", 0) == 0);
    CHECK(proj.size() > proj.find('\n') + 1);  // has data rows

    CHECK(fs_grow_equilibrium_manifold(p, "nonsense", 4.0, 2, &patch) ==
          FS_ERR_INVALID_ARGUMENT);
    fs_patch_destroy(patch);
    fs_params_destroy(p);
}

TEST_CASE("split and bifurcation location through the C surface") {
    fs_params* p = reference_params(0.5, 0.0);
    double split = 1.0;
    REQUIRE(fs_homoclinic_split(p, &split) == FS_OK);
    CHECK(std::fabs(split) <= 1e-6);

    double mu_star = 0.0;
    REQUIRE(fs_locate_bifurcation(p, -1e-3, 1e-3, "split", 1e-8, &mu_star) == FS_OK);
    CHECK(std::fabs(mu_star) <= 1e-7);
    CHECK(fs_locate_bifurcation(p, -1e-3, 1e-3, "bogus", 1e-8, &mu_star) ==
          FS_ERR_INVALID_ARGUMENT);
    fs_params_destroy(p);
}

TEST_CASE("orientation index and status names") {
    fs_params* p = reference_params(0.2, 0.0);
    double index = 0.0;
    REQUIRE(fs_orientation_index(p, &index) == FS_OK);
    CHECK(index == 1.0);
    fs_params_destroy(p);
    CHECK(std::string(fs_status_name(FS_OK)) == "ok");
    CHECK(std::string(fs_status_name(FS_ERR_NO_SIGN_CHANGE)) == "NoSignChange");
}
