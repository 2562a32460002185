#ifndef FLIP_MODEL_HPP
#define FLIP_MODEL_HPP

#include <optional>

#include "flip/vec.hpp"

namespace flip {

// Parameters of Sandstede's vector field. Defaults are the reference
// configuration used throughout: a, b, c, beta, gamma, mu_tilde, delta fixed,
// with alpha and mu the two free unfolding parameters.
struct Params {
    double a = 0.7;
    double b = 1.0;
    double c = -2.0;
    double alpha = 0.0;
    double beta = 1.0;
    double gamma = 2.0;
    double mu = 0.0;
    double mu_tilde = 0.0;
    double delta = 0.0;

    static Params reference(double alpha, double mu) {
        Params p;
        p.alpha = alpha;
        p.mu = mu;
        return p;
    }
};

using State = Vec3;

// Vector field and its analytic Jacobian.
Vec3 eval_field(const Params& p, const State& s);
Mat3 eval_jacobian(const Params& p, const State& s);

// Real eigen-structure of the saddle at the origin, sorted
// lambda_ss < lambda_s < 0 < lambda_u. Eigenvectors are unit norm with a
// deterministic sign convention (e_u points into the x > 0 excursion).
struct EigenData {
    double lambda_ss = 0.0, lambda_s = 0.0, lambda_u = 0.0;
    Vec3 e_ss, e_s, e_u;
};

EigenData origin_eigens(const Params& p);

// Adjoint (dual) basis f_i with dot(f_i, e_j) = delta_ij, rows of E^-1.
struct AdjointBasis {
    Vec3 f_ss, f_s, f_u;
};
AdjointBasis adjoint_basis(const EigenData& e);

enum class Stability { Saddle, StableFocus, UnstableFocus, StableNode, UnstableNode, Other };

// Eigenvalues of a general 3x3 Jacobian: either three reals or one real plus
// a complex-conjugate pair, classified from the characteristic cubic.
struct Spectrum {
    bool has_complex_pair = false;
    double real[3] = {0, 0, 0};   // all roots when real; real[0] is the lone real root otherwise
    double pair_re = 0.0;         // complex pair, when present
    double pair_im = 0.0;
};

Spectrum spectrum(const Mat3& J);
Stability classify_spectrum(const Spectrum& sp);

struct Equilibrium {
    State location;
    Stability stability = Stability::Other;
    Spectrum spec;
    std::optional<EigenData> eigen;  // present for real saddle spectra
};

// Newton refinement of an equilibrium from a starting guess.
// When require_secondary is set the origin is rejected (guard |x| > 1e-6).
Equilibrium find_equilibrium(const Params& p, const State& guess, bool require_secondary = false);

// The secondary equilibrium q, found from the default guess with a coarse
// multistart fallback over [0, 1.5]^3.
Equilibrium find_q(const Params& p);

struct CaseReport {
    bool resonance = false;        // |lambda_s| == lambda_u within 1e-9
    bool case_c = false;           // |lambda_ss| < lambda_u or 2|lambda_s| < lambda_u
    bool weak_leading = false;     // |lambda_s| < |lambda_ss| / 2
    double lambda_ss = 0, lambda_s = 0, lambda_u = 0;
};

CaseReport classify_case(const Params& p);

// Bisection in mu for the zero of the real part of q's complex eigenvalue
// pair at fixed alpha. Throws no_sign_change when the bracket does not
// straddle the Hopf point.
double detect_hopf_at_q(const Params& p, double mu_lo, double mu_hi, double tol = 1e-8);

}  // namespace flip

#endif
