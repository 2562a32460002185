#ifndef FLIP_CONNECTIONS_HPP
#define FLIP_CONNECTIONS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flip/manifolds.hpp"
#include "flip/model.hpp"
#include "flip/orbits.hpp"

namespace flip {

// Signed split of the positive W^u(0) branch at its deepest return to the
// origin after the primary excursion, measured as the e_u-component of the
// offset in the origin eigenbasis. Falls back to a signed distance proxy when
// the trajectory enters V without any close return.
struct GapMeasurement {
    double value = 0.0;
    double min_distance = 0.0;
    Vec3 closest_state;
    int sigma_crossings = 0;
    bool via_fallback = false;
};

struct SplitConfig {
    double r_loc = 0.1;      // measurement sphere around the origin
    double r_far = 0.5;      // primary excursion must first leave this ball
    double r_reject = 0.35;  // beyond this, no usable close return
    double t_max = 400.0;
    double seed_offset = 1e-7;
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
};

GapMeasurement homoclinic_split(const Params& p, const SplitConfig& sc = {});

// Signed distance of the arriving W^u(0) branch from the stable set of a
// target periodic orbit: the section iterate closest to the orbit's fixed
// point, decomposed in the eigenbasis of the linearized return map; the
// component along the unstable eigenvector is returned.
GapMeasurement hetero_gap(const Params& p, const PeriodicOrbit& target, double t_max = 600.0);

struct BifurcationPoint {
    std::string kind;
    double alpha = 0.0;
    double mu = 0.0;
    double bracket = 0.0;  // final bracket width
    int loops_gamma_o = -1;
    int loops_gamma_t = -1;
    std::optional<CaseReport> case_report;
};

enum class Detector { Split, GapGammaO, GapGammaT, ZetaChange, TangencyGammaO, TangencyF };

// One-parameter slice bisection in mu at fixed alpha. Continuous detectors
// (split, gap) bisect on the sign; integer detectors (zeta, tangency counts)
// bisect on "differs from the value at the mu-high end". When a continuous
// detector has equal signs at the bracket ends, the bracket is first refined
// by a scan; a split evaluation that fails inside the bisection falls back to
// the zeta-change predicate for that midpoint.
BifurcationPoint locate_bifurcation(const Params& base, double mu_lo, double mu_hi,
                                    Detector detector, const std::string& kind,
                                    double tol = 1e-8);

// Orientation of the stable-manifold closure along the primary homoclinic
// orbit at mu = 0, normalized to +-1. The tangent plane of W^s, taken from
// the local graph at the outgoing truncation sphere, is carried around the
// loop by the variational flow; the projection of the arriving plane normal
// onto the unstable adjoint direction gives the side. Requires the point to
// be on the locus (|split| <= 1e-6).
double orientation_index(const Params& p, double truncation_radius = 0.05);

// Bisection on alpha at mu = 0 between opposite orientation_index signs.
BifurcationPoint locate_inclination_flip(const Params& base, double alpha_lo, double alpha_hi,
                                         double tol = 1e-6);

// Transverse crossing count between the section traces of two patches.
int tangency_count(const Params& p, const ManifoldPatch& a, const ManifoldPatch& b,
                   const SectionPlane& section, int max_crossings = 3);

// Integer detector behind the Tan and F targets: crossings of the
// W^u(Gamma_o) seed family with the stable set of the origin (F) or of
// Gamma_o itself (Tan), counted as sign changes of the transverse offset
// along the cyclic family.
int tangency_detector_count(const Params& p, bool against_origin_manifold);

// Rotation counts of the final W^u(0) trajectory around the primary orbits
// (entries into balls of radius 0.1 about their fixed points; the primary
// excursion pass is not attributed to either orbit).
void attach_rotation_counts(const Params& p, BifurcationPoint& pt);

// The alpha = 0.5 bifurcation sequence: homoclinic/heteroclinic cascade
// representatives located by slice bisection, then PD / SNP of the primary
// orbits, optionally the two tangency targets. Points are ordered by
// decreasing mu. Failures are reported per point, not thrown.
struct SliceOutcome {
    std::vector<BifurcationPoint> points;
    std::vector<std::string> failures;
};
SliceOutcome run_table_slice(double alpha = 0.5, bool include_tangency_targets = false);

}  // namespace flip

#endif
