#include "flip/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "flip/error.hpp"

namespace flip {

const char* errc_name(errc c) {
    switch (c) {
        case errc::invalid_argument: return "InvalidArgument";
        case errc::not_a_saddle: return "NotASaddle";
        case errc::no_convergence: return "NoConvergence";
        case errc::converged_to_origin: return "ConvergedToOrigin";
        case errc::no_sign_change: return "NoSignChange";
        case errc::q_not_found: return "QNotFound";
        case errc::odd_crossing_count: return "OddCrossingCount";
        case errc::step_size_underflow: return "StepSizeUnderflow";
        case errc::divergence: return "Divergence";
        case errc::no_return: return "NoReturn";
        case errc::newton_diverged: return "NewtonDiverged";
        case errc::section_not_transverse: return "SectionNotTransverse";
        case errc::insufficient_returns: return "InsufficientReturns";
        case errc::constant_sequence: return "ConstantSequence";
        case errc::complex_multipliers: return "ComplexMultipliers";
        case errc::eigenstructure_missing: return "EigenstructureMissing";
        case errc::orbit_missing: return "OrbitMissing";
        case errc::never_near_orbit: return "NeverNearOrbit";
        case errc::no_close_approach: return "NoCloseApproach";
        case errc::not_on_homoclinic_locus: return "NotOnHomoclinicLocus";
        case errc::truncation_too_short: return "TruncationTooShort";
        case errc::no_bracket: return "NoBracket";
        case errc::detector_failure: return "DetectorFailure";
        case errc::empty_trace: return "EmptyTrace";
        case errc::step_floor_reached: return "StepFloorReached";
        case errc::io_error: return "IoError";
    }
    return "UnknownError";
}

Vec3 eval_field(const Params& p, const State& s) {
    const double x = s.x, y = s.y, z = s.z;
    const double w = p.mu_tilde - p.alpha * z;
    Vec3 f;
    f.x = p.a * x + p.b * y - p.a * x * x + w * x * (2.0 - 3.0 * x) + p.delta * z;
    f.y = p.b * x + p.a * y - 1.5 * p.b * x * x - 1.5 * p.a * x * y - 2.0 * y * w - p.delta * z;
    f.z = p.c * z + p.mu * x + p.gamma * x * z + p.alpha * p.beta * (x * x * (1.0 - x) - y * y);
    return f;
}

Mat3 eval_jacobian(const Params& p, const State& s) {
    const double x = s.x, y = s.y, z = s.z;
    const double w = p.mu_tilde - p.alpha * z;
    Mat3 J;
    J(0, 0) = p.a - 2.0 * p.a * x + w * (2.0 - 6.0 * x);
    J(0, 1) = p.b;
    J(0, 2) = -p.alpha * x * (2.0 - 3.0 * x) + p.delta;
    J(1, 0) = p.b - 3.0 * p.b * x - 1.5 * p.a * y;
    J(1, 1) = p.a - 1.5 * p.a * x - 2.0 * w;
    J(1, 2) = 2.0 * p.alpha * y - p.delta;
    J(2, 0) = p.mu + p.gamma * z + p.alpha * p.beta * (2.0 * x - 3.0 * x * x);
    J(2, 1) = -2.0 * p.alpha * p.beta * y;
    J(2, 2) = p.c + p.gamma * x;
    return J;
}

namespace {

// Real roots of x^3 + px^2 + qx + r, with a Newton polish on each root.
// Returns the number of real roots (1 or 3); a complex pair is reported
// through pair_re/pair_im when only one real root exists.
int cubic_roots(double p, double q, double r, double roots[3], double& pair_re, double& pair_im) {
    const double shift = p / 3.0;
    const double aa = q - p * p / 3.0;
    const double bb = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    const double disc = (bb * bb) / 4.0 + (aa * aa * aa) / 27.0;

    auto polish = [&](double x) {
        for (int i = 0; i < 8; ++i) {
            double f = ((x + p) * x + q) * x + r;
            double df = (3.0 * x + 2.0 * p) * x + q;
            if (df == 0.0) break;
            double step = f / df;
            x -= step;
            if (std::fabs(step) < 1e-16 * std::max(1.0, std::fabs(x))) break;
        }
        return x;
    };

    if (disc > 1e-30) {
        double sq = std::sqrt(disc);
        double u = std::cbrt(-bb / 2.0 + sq);
        double v = std::cbrt(-bb / 2.0 - sq);
        roots[0] = polish(u + v - shift);
        // remaining quadratic factor x^2 + (p + x0) x + ... via deflation
        double x0 = roots[0];
        double b1 = p + x0;
        double c1 = q + x0 * b1;
        pair_re = -b1 / 2.0;
        double under = c1 - b1 * b1 / 4.0;
        pair_im = std::sqrt(std::max(under, 0.0));
        return 1;
    }
    // three real roots (trigonometric form), possibly with multiplicity
    double m = 2.0 * std::sqrt(std::max(-aa / 3.0, 0.0));
    double arg = (m == 0.0) ? 0.0 : std::clamp(3.0 * bb / (aa * m), -1.0, 1.0);
    double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
        roots[k] = polish(m * std::cos(theta - 2.0 * M_PI * k / 3.0) - shift);
    std::sort(roots, roots + 3);
    pair_re = pair_im = 0.0;
    return 3;
}

// Null-space direction of (J - lambda I) via the largest cross product of rows.
Vec3 eigvec_for(const Mat3& J, double lambda) {
    Mat3 A = J;
    A(0, 0) -= lambda;
    A(1, 1) -= lambda;
    A(2, 2) -= lambda;
    Vec3 cands[3] = {cross(row(A, 0), row(A, 1)), cross(row(A, 0), row(A, 2)),
                     cross(row(A, 1), row(A, 2))};
    Vec3 best = cands[0];
    for (int i = 1; i < 3; ++i)
        if (norm(cands[i]) > norm(best)) best = cands[i];
    if (norm(best) == 0.0) raise(errc::not_a_saddle, "degenerate eigenvector");
    return normalized(best);
}

Vec3 fix_sign(Vec3 v) {
    const double tol = 1e-12;
    if (std::fabs(v.x) > tol) return v.x > 0 ? v : -v;
    if (std::fabs(v.y) > tol) return v.y > 0 ? v : -v;
    return v.z > 0 ? v : -v;
}

}  // namespace

Spectrum spectrum(const Mat3& J) {
    const double tr = trace(J);
    const double m2 = J(0, 0) * J(1, 1) - J(0, 1) * J(1, 0) + J(0, 0) * J(2, 2)
                    - J(0, 2) * J(2, 0) + J(1, 1) * J(2, 2) - J(1, 2) * J(2, 1);
    const double dt = det(J);
    Spectrum sp;
    double roots[3];
    int n = cubic_roots(-tr, m2, -dt, roots, sp.pair_re, sp.pair_im);
    if (n == 1) {
        sp.has_complex_pair = true;
        sp.real[0] = roots[0];
    } else {
        sp.real[0] = roots[0];
        sp.real[1] = roots[1];
        sp.real[2] = roots[2];
    }
    return sp;
}

Stability classify_spectrum(const Spectrum& sp) {
    if (sp.has_complex_pair) {
        if (sp.pair_re < 0.0 && sp.real[0] < 0.0) return Stability::StableFocus;
        if (sp.pair_re > 0.0) return Stability::UnstableFocus;
        return Stability::Other;
    }
    int pos = 0, neg = 0;
    for (double l : sp.real) (l > 0.0 ? pos : neg)++;
    if (pos > 0 && neg > 0) return Stability::Saddle;
    if (neg == 3) return Stability::StableNode;
    if (pos == 3) return Stability::UnstableNode;
    return Stability::Other;
}

EigenData origin_eigens(const Params& p) {
    double l1, l2, l3;
    Mat3 J = eval_jacobian(p, {0, 0, 0});
    if (p.delta == 0.0) {
        const double rad = std::sqrt(p.b * p.b + 4.0 * p.mu_tilde * p.mu_tilde);
        l1 = p.a + rad;
        l2 = p.a - rad;
        l3 = p.c;
    } else {
        Spectrum sp = spectrum(J);
        if (sp.has_complex_pair) raise(errc::not_a_saddle, "complex spectrum at origin");
        l1 = sp.real[2];
        l2 = sp.real[1];
        l3 = sp.real[0];
    }
    double lam[3] = {l1, l2, l3};
    std::sort(lam, lam + 3);
    if (!(lam[0] < lam[1] && lam[1] < 0.0 && 0.0 < lam[2]))
        raise(errc::not_a_saddle, "origin eigenvalue ordering violated");

    EigenData e;
    e.lambda_ss = lam[0];
    e.lambda_s = lam[1];
    e.lambda_u = lam[2];
    e.e_ss = fix_sign(eigvec_for(J, e.lambda_ss));
    e.e_s = fix_sign(eigvec_for(J, e.lambda_s));
    e.e_u = fix_sign(eigvec_for(J, e.lambda_u));
    return e;
}

AdjointBasis adjoint_basis(const EigenData& e) {
    // rows of E^-1 where E has columns (e_ss, e_s, e_u)
    Mat3 E;
    for (int r = 0; r < 3; ++r) {
        E(r, 0) = e.e_ss[r];
        E(r, 1) = e.e_s[r];
        E(r, 2) = e.e_u[r];
    }
    AdjointBasis f;
    Vec3 cols[3];
    for (int c = 0; c < 3; ++c) {
        Vec3 rhs{c == 0 ? 1.0 : 0.0, c == 1 ? 1.0 : 0.0, c == 2 ? 1.0 : 0.0};
        if (!solve3(transpose(E), rhs, cols[c]))
            raise(errc::not_a_saddle, "eigenbasis is singular");
    }
    f.f_ss = cols[0];
    f.f_s = cols[1];
    f.f_u = cols[2];
    return f;
}

Equilibrium find_equilibrium(const Params& p, const State& guess, bool require_secondary) {
    State x = guess;
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        Vec3 f = eval_field(p, x);
        if (norm(f) <= 1e-12) {
            converged = true;
            break;
        }
        Vec3 dx;
        if (!solve3(eval_jacobian(p, x), -1.0 * f, dx))
            raise(errc::no_convergence, "singular Jacobian in Newton step");
        x += dx;
        if (!finite(x)) raise(errc::no_convergence, "Newton iterate diverged");
        if (norm(dx) <= 1e-13) {
            converged = norm(eval_field(p, x)) <= 1e-12;
            break;
        }
    }
    if (!converged && norm(eval_field(p, x)) > 1e-12)
        raise(errc::no_convergence, "no equilibrium within 50 iterations");
    if (require_secondary && norm(x) <= 1e-6)
        raise(errc::converged_to_origin, "Newton landed on the origin");

    Equilibrium eq;
    eq.location = x;
    eq.spec = spectrum(eval_jacobian(p, x));
    eq.stability = classify_spectrum(eq.spec);
    if (!eq.spec.has_complex_pair && eq.stability == Stability::Saddle) {
        try {
            if (norm(x) <= 1e-6) eq.eigen = origin_eigens(p);
        } catch (const Error&) {
        }
    }
    return eq;
}

Equilibrium find_q(const Params& p) {
    const State default_guess{0.7, 0.2, 0.1};
    try {
        return find_equilibrium(p, default_guess, true);
    } catch (const Error&) {
    }
    // multistart fallback over [0, 1.5]^3
    Equilibrium best;
    double best_dist = -1.0;
    for (int i = 0; i <= 5; ++i)
        for (int j = 0; j <= 5; ++j)
            for (int k = 0; k <= 5; ++k) {
                State g{0.3 * i, 0.3 * j, 0.3 * k};
                try {
                    Equilibrium eq = find_equilibrium(p, g, true);
                    double d = norm(eq.location - default_guess);
                    if (best_dist < 0.0 || d < best_dist) {
                        best = eq;
                        best_dist = d;
                    }
                } catch (const Error&) {
                }
            }
    if (best_dist < 0.0) raise(errc::q_not_found, "no secondary equilibrium in [0,1.5]^3");
    return best;
}

CaseReport classify_case(const Params& p) {
    EigenData e = origin_eigens(p);
    CaseReport r;
    r.lambda_ss = e.lambda_ss;
    r.lambda_s = e.lambda_s;
    r.lambda_u = e.lambda_u;
    r.resonance = std::fabs(std::fabs(e.lambda_s) - e.lambda_u) <= 1e-9;
    r.case_c = (std::fabs(e.lambda_ss) < e.lambda_u) || (2.0 * std::fabs(e.lambda_s) < e.lambda_u);
    r.weak_leading = std::fabs(e.lambda_s) < std::fabs(e.lambda_ss) / 2.0;
    return r;
}

double detect_hopf_at_q(const Params& p, double mu_lo, double mu_hi, double tol) {
    if (!(mu_lo < mu_hi)) raise(errc::invalid_argument, "empty mu bracket");
    auto re_pair = [&](double mu) {
        Params q = p;
        q.mu = mu;
        Equilibrium eq = find_q(q);
        if (!eq.spec.has_complex_pair)
            raise(errc::no_sign_change, "q has no complex pair in the bracket");
        return eq.spec.pair_re;
    };
    double flo = re_pair(mu_lo), fhi = re_pair(mu_hi);
    if (flo == 0.0) return mu_lo;
    if (fhi == 0.0) return mu_hi;
    if ((flo > 0.0) == (fhi > 0.0))
        raise(errc::no_sign_change, "real part does not change sign over the bracket");
    while (mu_hi - mu_lo > tol) {
        double mid = 0.5 * (mu_lo + mu_hi);
        double fm = re_pair(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            mu_lo = mid;
            flo = fm;
        } else {
            mu_hi = mid;
        }
    }
    return 0.5 * (mu_lo + mu_hi);
}

}  // namespace flip
