// End-to-end checks of the command-line front end. The binary path arrives
// as the test argument; every invocation goes through std::system.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

std::string g_cli;

int run(const std::string& args) {
    std::string cmd = g_cli + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-flipscope>\n");
        return 2;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}

TEST_CASE("inverted sweep range exits with the configuration code") {
    std::remove("bad_sweep.csv");
    int rc = run("sweep --alpha-min 0.7 --alpha-max 0.3 --mu-min 0 --mu-max 0.001 "
                 "--n-alpha 2 --n-mu 2 --out bad_sweep.csv");
    CHECK(rc == 2);
    CHECK(!exists("bad_sweep.csv"));
}

TEST_CASE("missing required parameters exit with the configuration code") {
    CHECK(run("orbit --mu 0.001") == 2);
    CHECK(run("definitely-not-a-subcommand") == 2);
}

TEST_CASE("small sweep produces a deterministic raster") {
    int rc = run("sweep --alpha-min 0.45 --alpha-max 0.55 --mu-min -0.002 --mu-max 0.001 "
                 "--n-alpha 3 --n-mu 3 --workers 2 --out cli_sweep1.csv");
    REQUIRE(rc == 0);
    rc = run("sweep --alpha-min 0.45 --alpha-max 0.55 --mu-min -0.002 --mu-max 0.001 "
             "--n-alpha 3 --n-mu 3 --workers 1 --out cli_sweep2.csv");
    REQUIRE(rc == 0);
    std::string a = slurp("cli_sweep1.csv"), b = slurp("cli_sweep2.csv");
    CHECK(a == b);
    CHECK(a.rfind("alpha,mu,zeta,crossings,termination\n", 0) == 0);
}

TEST_CASE("connect evaluates the split at a point") {
    int rc = run("connect --alpha 0.5 --mu 0.0");
    REQUIRE(rc == 0);
    std::string out = slurp("cli_stdout.txt");
    CHECK(out.find("homoclinic split") != std::string::npos);
}

TEST_CASE("connect bisects a bracket") {
    int rc = run("connect --alpha 0.5 --detector split --mu-lo -0.001 --mu-hi 0.001");
    REQUIRE(rc == 0);
    std::string out = slurp("cli_stdout.txt");
    CHECK(out.find("split located at mu") != std::string::npos);
}

TEST_CASE("orbit subcommand reports the twisted orbit") {
    int rc = run("orbit --alpha 0.5 --mu -0.002 --which gamma-t");
    REQUIRE(rc == 0);
    std::string out = slurp("cli_stdout.txt");
    CHECK(out.find("nonorientable") != std::string::npos);
}

TEST_CASE("manifold subcommand writes patch and sphere CSVs") {
    int rc = run("manifold --alpha 0.5 --mu 0.0 --which strong-stable-1d --cap 4 "
                 "--out cli_patch.csv --sphere-out cli_sphere.csv");
    REQUIRE(rc == 0);
    CHECK(slurp("cli_patch.csv").rfind("traj_id,t,x,y,z,arclength\n", 0) == 0);
    CHECK(slurp("cli_sphere.csv").rfind("curve_id,seq,x,y,z\n", 0) == 0);
}

TEST_CASE("project consumes a curve-set CSV") {
    REQUIRE(exists("cli_sphere.csv"));  // produced by the manifold case
    int rc = run("project --in cli_sphere.csv --out cli_projected.csv");
    REQUIRE(rc == 0);
    CHECK(slurp("cli_projected.csv").rfind("curve_id,seq,px,py\n", 0) == 0);
}

TEST_CASE("flip subcommand prints the located alpha") {
    int rc = run("flip --alpha-min 0.2 --alpha-max 0.5 --out cli_flip.csv");
    REQUIRE(rc == 0);
    std::string out = slurp("cli_stdout.txt");
    CHECK(out.find("inclination flip at alpha = 0.369") != std::string::npos);
    std::string csv = slurp("cli_flip.csv");
    CHECK(csv.rfind("kind,alpha,mu,bracket,loops_gamma_o,loops_gamma_t\n", 0) == 0);
}

TEST_CASE("returnmap writes the pair list") {
    int rc = run("returnmap --alpha 0.5 --mu -0.007076768 --n 120 --skip 120 --out cli_rm.csv");
    REQUIRE(rc == 0);
    std::string body = slurp("cli_rm.csv");
    CHECK(body.rfind("x_i,x_ip1\n", 0) == 0);
    int lines = 0;
    for (char c : body)
        if (c == '\n') lines++;
    CHECK(lines == 121);
}

TEST_CASE("config file and environment variables feed parameters") {
    {
        std::ofstream cfg("cli_config.txt");
        cfg << "# comment line\n";
        cfg << "alpha = 0.5\n";
        cfg << "mu = 0.0\n";
    }
    int rc = run("--config cli_config.txt connect");
    REQUIRE(rc == 0);
    CHECK(slurp("cli_stdout.txt").find("homoclinic split") != std::string::npos);

    // environment overrides the file
    std::string cmd = "FLIPSCOPE_MU=0.001 " + g_cli +
                      " --config cli_config.txt connect > cli_stdout.txt 2> cli_stderr.txt";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp("cli_stdout.txt").find("homoclinic split") != std::string::npos);
}
