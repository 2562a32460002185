#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "flip/error.hpp"
#include "flip/model.hpp"

using namespace flip;

namespace {

// term-by-term evaluation, kept deliberately separate from eval_field
Vec3 field_oracle(const Params& p, const Vec3& s) {
    double x = s.x, y = s.y, z = s.z;
    double fx = 0.0;
    fx += p.a * x;
    fx += p.b * y;
    fx -= p.a * x * x;
    fx += (p.mu_tilde - p.alpha * z) * x * 2.0;
    fx -= (p.mu_tilde - p.alpha * z) * x * 3.0 * x;
    fx += p.delta * z;
    double fy = 0.0;
    fy += p.b * x;
    fy += p.a * y;
    fy -= 1.5 * p.b * x * x;
    fy -= 1.5 * p.a * x * y;
    fy -= 2.0 * y * (p.mu_tilde - p.alpha * z);
    fy -= p.delta * z;
    double fz = 0.0;
    fz += p.c * z;
    fz += p.mu * x;
    fz += p.gamma * x * z;
    fz += p.alpha * p.beta * x * x;
    fz -= p.alpha * p.beta * x * x * x;
    fz -= p.alpha * p.beta * y * y;
    return {fx, fy, fz};
}

Params random_params(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Params p;
    p.a = u(rng);
    p.b = u(rng);
    p.c = u(rng);
    p.alpha = u(rng);
    p.beta = u(rng);
    p.gamma = u(rng);
    p.mu = u(rng);
    p.mu_tilde = u(rng);
    p.delta = u(rng);
    return p;
}

}  // namespace

TEST_CASE("origin is an equilibrium for all parameter values") {
    std::mt19937 rng(42);
    for (int i = 0; i < 1000; ++i) {
        Params p = random_params(rng);
        Vec3 f = eval_field(p, {0, 0, 0});
        CHECK(f.x == 0.0);
        CHECK(f.y == 0.0);
        CHECK(f.z == 0.0);
    }
}

TEST_CASE("z-axis is invariant when delta vanishes") {
    Params p = Params::reference(0.5, 0.0);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uz(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        double z = uz(rng);
        Vec3 f = eval_field(p, {0, 0, z});
        CHECK(f.x == 0.0);
        CHECK(f.y == 0.0);
        CHECK(f.z == doctest::Approx(p.c * z).epsilon(1e-14));
    }
}

TEST_CASE("field value matches the independent term-by-term evaluation") {
    Params p = Params::reference(0.5, 0.0);
    Vec3 f = eval_field(p, {0.1, 0.1, 0.1});
    CHECK(f.x == doctest::Approx(0.1545).epsilon(1e-14));
    CHECK(f.y == doctest::Approx(0.1545).epsilon(1e-14));
    CHECK(f.z == doctest::Approx(-0.1805).epsilon(1e-14));

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> us(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
        Params q = random_params(rng);
        Vec3 s{us(rng), us(rng), us(rng)};
        Vec3 a = eval_field(q, s);
        Vec3 b = field_oracle(q, s);
        CHECK(norm(a - b) <= 1e-13 * std::max(1.0, norm(b)));
    }
}

TEST_CASE("jacobian at the origin has the block structure") {
    Params p = Params::reference(0.3, 0.0);
    Mat3 J = eval_jacobian(p, {0, 0, 0});
    CHECK(J(0, 0) == doctest::Approx(p.a));
    CHECK(J(0, 1) == doctest::Approx(p.b));
    CHECK(J(1, 0) == doctest::Approx(p.b));
    CHECK(J(1, 1) == doctest::Approx(p.a));
    CHECK(J(2, 2) == doctest::Approx(p.c));
    CHECK(J(0, 2) == 0.0);
    CHECK(J(1, 2) == 0.0);
}

TEST_CASE("jacobian agrees with central differences of the field") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> us(-1.0, 1.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        Params p = random_params(rng);
        Vec3 s{us(rng), us(rng), us(rng)};
        Mat3 J = eval_jacobian(p, s);
        for (int c = 0; c < 3; ++c) {
            Vec3 dp = s, dm = s;
            dp[c] += h;
            dm[c] -= h;
            Vec3 diff = (1.0 / (2.0 * h)) * (eval_field(p, dp) - eval_field(p, dm));
            for (int r = 0; r < 3; ++r) {
                double scale = std::max(1.0, std::fabs(J(r, c)));
                CHECK(std::fabs(J(r, c) - diff[r]) <= 1e-6 * scale);
            }
        }
    }
}

TEST_CASE("origin eigenvalues at the reference configuration") {
    Params p = Params::reference(0.5, 0.0);
    EigenData e = origin_eigens(p);
    CHECK(e.lambda_u == doctest::Approx(1.7).epsilon(1e-14));
    CHECK(e.lambda_s == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(e.lambda_ss == doctest::Approx(-2.0).epsilon(1e-14));
    // strong stable direction is the z-axis
    CHECK(std::fabs(e.e_ss.x) <= 1e-12);
    CHECK(std::fabs(e.e_ss.y) <= 1e-12);
    CHECK(std::fabs(std::fabs(e.e_ss.z) - 1.0) <= 1e-12);
    // eigen residuals
    Mat3 J = eval_jacobian(p, {0, 0, 0});
    CHECK(norm(J * e.e_ss - e.lambda_ss * e.e_ss) <= 1e-10);
    CHECK(norm(J * e.e_s - e.lambda_s * e.e_s) <= 1e-10);
    CHECK(norm(J * e.e_u - e.lambda_u * e.e_u) <= 1e-10);
}

TEST_CASE("eigen residuals hold with the z-coupling active") {
    Params p = Params::reference(0.4, 0.003);  // mu tilts the eigenvectors
    EigenData e = origin_eigens(p);
    Mat3 J = eval_jacobian(p, {0, 0, 0});
    CHECK(norm(J * e.e_ss - e.lambda_ss * e.e_ss) <= 1e-10);
    CHECK(norm(J * e.e_s - e.lambda_s * e.e_s) <= 1e-10);
    CHECK(norm(J * e.e_u - e.lambda_u * e.e_u) <= 1e-10);
    CHECK(norm(e.e_u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resonant eigenvalues are returned and flagged by the case report") {
    Params p;
    p.a = 0.0;
    p.b = 1.0;
    p.c = -2.0;
    p.mu_tilde = 0.0;
    p.alpha = 0.3;
    p.mu = 0.0;
    EigenData e = origin_eigens(p);
    CHECK(e.lambda_u == doctest::Approx(1.0));
    CHECK(e.lambda_s == doctest::Approx(-1.0));
    CHECK(e.lambda_ss == doctest::Approx(-2.0));
    CaseReport r = classify_case(p);
    CHECK(r.resonance);
}

TEST_CASE("not-a-saddle is rejected") {
    Params p;
    p.a = -2.0;  // both in-plane eigenvalues negative
    p.b = 1.0;
    p.c = -2.0;
    CHECK_THROWS_AS((void)origin_eigens(p), Error);
}

TEST_CASE("case classification at the reference configuration") {
    CaseReport r = classify_case(Params::reference(0.5, 0.0));
    CHECK(r.case_c);  // 2 * 0.3 = 0.6 < 1.7
    CHECK(!r.resonance);
    CHECK(r.weak_leading);  // 0.3 < 2.0 / 2
    CHECK(std::fabs(r.lambda_u - 1.7) <= 1e-12);
    // |lambda_ss| = 2 > lambda_u = 1.7: the first clause alone would fail
    CHECK(std::fabs(r.lambda_ss) > r.lambda_u);
}

TEST_CASE("newton refinement lands on the origin from the zero guess") {
    Params p = Params::reference(0.5, 0.001);
    Equilibrium eq = find_equilibrium(p, {0, 0, 0});
    CHECK(norm(eq.location) <= 1e-12);
    CHECK(eq.stability == Stability::Saddle);
}

TEST_CASE("secondary equilibrium matches a brute-force multistart scan") {
    Params p = Params::reference(0.5, 0.001);

    // independent oracle: dense Newton multistart over [0, 1.5]^3 on the raw field
    std::vector<Vec3> roots;
    for (int i = 0; i <= 7; ++i)
        for (int j = 0; j <= 7; ++j)
            for (int k = 0; k <= 7; ++k) {
                Vec3 x{1.5 * i / 7.0, 1.5 * j / 7.0, 1.5 * k / 7.0};
                bool ok = true;
                for (int it = 0; it < 60; ++it) {
                    Vec3 f = field_oracle(p, x);
                    if (norm(f) < 1e-13) break;
                    Vec3 dx;
                    if (!solve3(eval_jacobian(p, x), -1.0 * f, dx) || !finite(x + dx)) {
                        ok = false;
                        break;
                    }
                    x += dx;
                    if (norm(x) > 10.0) {
                        ok = false;
                        break;
                    }
                }
                if (!ok || norm(field_oracle(p, x)) > 1e-12) continue;
                bool fresh = true;
                for (const Vec3& r : roots)
                    if (norm(r - x) < 1e-8) fresh = false;
                if (fresh) roots.push_back(x);
            }

    Equilibrium q = find_q(p);
    CHECK(norm(eval_field(p, q.location)) <= 1e-12);
    CHECK(norm(q.location) > 1e-6);
    bool matched = false;
    for (const Vec3& r : roots)
        if (norm(r - q.location) <= 1e-8) matched = true;
    CHECK(matched);
    CHECK(q.stability == Stability::StableFocus);
}

TEST_CASE("seeking the secondary equilibrium refuses the origin") {
    Params p = Params::reference(0.5, 0.001);
    CHECK_THROWS_AS((void)find_equilibrium(p, {1e-9, 0, 0}, true), Error);
}

TEST_CASE("q turns into an unstable focus past the Hopf point") {
    Params p = Params::reference(0.5, 0.008);
    Equilibrium q = find_q(p);
    CHECK(q.spec.has_complex_pair);
    CHECK(q.stability == Stability::UnstableFocus);
}

TEST_CASE("hopf detection at q brackets the real-part zero") {
    Params p = Params::reference(0.5, 0.0);

    // derived bracket: scan the real part over a mu grid first
    double lo = 0.0, hi = 0.0;
    double prev_mu = 0.001;
    double prev_re;
    {
        Params q = p;
        q.mu = prev_mu;
        prev_re = find_q(q).spec.pair_re;
    }
    for (double mu = 0.002; mu <= 0.012; mu += 0.001) {
        Params q = p;
        q.mu = mu;
        double re = find_q(q).spec.pair_re;
        if ((re > 0.0) != (prev_re > 0.0)) {
            lo = prev_mu;
            hi = mu;
            break;
        }
        prev_mu = mu;
        prev_re = re;
    }
    REQUIRE(lo != hi);

    double mu_star = detect_hopf_at_q(p, lo, hi);
    Params at = p;
    at.mu = mu_star;
    CHECK(std::fabs(find_q(at).spec.pair_re) <= 1e-6);

    // shrinking the bracket by 10x moves the root by no more than 1e-8
    double width = (hi - lo) / 10.0;
    double mu_star2 = detect_hopf_at_q(p, mu_star - width / 2, mu_star + width / 2);
    CHECK(std::fabs(mu_star - mu_star2) <= 1e-8);

    // no crossing over a monotone stretch
    CHECK_THROWS_AS((void)detect_hopf_at_q(p, -0.004, -0.001), Error);
}
