#ifndef FLIP_ORBITS_HPP
#define FLIP_ORBITS_HPP

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "flip/flow.hpp"
#include "flip/model.hpp"

namespace flip {

// Poincare section: plane crossings filtered by the sign of n.f.
struct SectionPlane {
    Vec3 normal{0, 1, 0};
    double offset = 0.0;
    EventDirection crossing = EventDirection::Increasing;

    // deterministic orthonormal in-plane basis
    Vec3 tangent1() const;
    Vec3 tangent2() const;
    Vec3 lift(double u1, double u2) const;  // point on the plane
    std::pair<double, double> coords(const Vec3& x) const;

    static SectionPlane default_section() { return {}; }  // y = 0, upward
};

enum class Orientability { Orientable, Nonorientable, Complex };

const char* orientability_name(Orientability o);

struct PeriodicOrbit {
    Vec3 fixed_point;
    double period = 0.0;
    Mat3 monodromy;
    double trace_integral = 0.0;  // integral of trace Df over one period
    std::complex<double> L1, L2;  // nontrivial multipliers, |L1| <= |L2|
    Orientability orientability = Orientability::Complex;
    int loop_count = 1;
    std::string label;
    SectionPlane section;
    std::vector<Vec3> shoot_points;  // multiple-shooting loop discretization

    bool saddle() const {
        return orientability != Orientability::Complex && std::abs(L1) < 1.0 && std::abs(L2) > 1.0;
    }
};

// k-th return of the flow to the section (k = loop_count). Raises no_return
// when the flow misses the section and section_not_transverse when a crossing
// fails the |n.f| >= 1e-6 transversality floor.
struct ReturnHit {
    Vec3 state;
    double time;
};
ReturnHit section_return(const Params& p, const SectionPlane& sec, const Vec3& start, int k,
                         double t_max = 500.0);

// Newton solve of the k-loop fixed point of the section map. The first
// return from the guess seeds an equal-time multiple-shooting corrector,
// which stays well conditioned when the multipliers are huge near the
// homoclinic loop. The monodromy is accumulated per shooting segment and
// deflated onto the section plane for the nontrivial multipliers.
PeriodicOrbit find_periodic_orbit(const Params& p, const SectionPlane& sec, const Vec3& guess,
                                  int loop_count = 1, const std::string& label = {});

// Re-solves an orbit from its stored loop discretization (continuation
// corrector).
PeriodicOrbit refine_orbit(const Params& p, const PeriodicOrbit& seed,
                           const std::string& label = {});

// Settles onto an attracting periodic orbit from probe seeds in the loop
// region (the bootstrap object for the primary-orbit branches).
PeriodicOrbit find_attracting_orbit(const Params& p, double t_settle = 2500.0);

// Harvests section crossings from the W^u(0) flow and solves for the
// one-loop saddle orbits; 'orientable' selects Gamma_o vs Gamma_t.
PeriodicOrbit find_primary_orbit(const Params& p, bool orientable);

// Period-doubled orbit branching from 'base' (seeds offset along the negative
// multiplier eigenvector, loop count doubled).
PeriodicOrbit find_doubled_orbit(const Params& p, const PeriodicOrbit& base);

// Secant-predictor / Newton-corrector continuation in mu. Near a fold the
// march halves its step to the floor and reports the bracketing data instead
// of stepping past the turning point.
struct ContinuationResult {
    std::vector<std::pair<double, PeriodicOrbit>> branch;
    bool hit_fold = false;
    double last_good_mu = 0.0;
    double first_failed_mu = 0.0;
};
ContinuationResult continue_orbit(const Params& p0, const PeriodicOrbit& orbit, double mu_target,
                                  double initial_step = 2e-4, double step_floor = 1e-9);

// Continuation cache along mu at fixed remaining parameters.
class OrbitBranch {
public:
    OrbitBranch(const Params& base, const PeriodicOrbit& seed, double mu_seed);
    const PeriodicOrbit& at(double mu);
    const Params& base() const { return base_; }

private:
    Params base_;
    int loop_count_;
    std::map<double, PeriodicOrbit> known_;
};

enum class MultiplierTarget { PlusOne, MinusOne, ComplexCollision };

// Bisection on a multiplier condition with fresh orbit solves from the
// branch cache. PlusOne is located as the existence fold of the branch.
double detect_multiplier_event(OrbitBranch& branch, MultiplierTarget target, double mu_lo,
                               double mu_hi, double tol = 1e-8);

// Successive section returns: skips a transient, records n more x-coordinates
// and rescales them affinely to [0, 1].
struct ReturnMapData {
    std::vector<double> scaled;                    // n + 1 values in [0, 1]
    std::vector<std::pair<double, double>> pairs;  // (x_i, x_{i+1})
    double raw_min = 0.0, raw_max = 0.0;
};
ReturnMapData collect_returns(const Params& p, const Vec3& s0, const SectionPlane& sec, int n,
                              int n_skip = 200, double t_max = 40000.0);

}  // namespace flip

#endif
