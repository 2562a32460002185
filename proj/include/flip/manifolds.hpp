#ifndef FLIP_MANIFOLDS_HPP
#define FLIP_MANIFOLDS_HPP

#include <string>
#include <vector>

#include "flip/flow.hpp"
#include "flip/model.hpp"
#include "flip/orbits.hpp"

namespace flip {

enum class ManifoldSelect { Stable2D, Unstable1D, StrongStable1D };
enum class OrbitManifoldSelect { Stable, Unstable };

struct ManifoldPatch {
    std::string owner;       // "origin", "q", or an orbit label
    Vec3 owner_point;        // equilibrium location / orbit fixed point
    int dimension = 1;
    bool stable = true;      // integration ran backward in time
    double cap = 0.0;        // arclength cap per trajectory
    std::vector<Vec3> seeds;
    std::vector<Trajectory> trajectories;  // ordered to match seeds
    bool bundle_orientable = true;         // orbit manifolds: v(T) = +v(0)
};

// Trajectory families seeded in the invariant eigenspaces of an equilibrium.
// 1D manifolds integrate two seeds +-eps along the eigenvector; the 2D stable
// family uses an eps-circle in span{e_s, e_ss} with angles clustered toward
// the strong-stable directions.
ManifoldPatch grow_equilibrium_manifold(const Params& p, const Equilibrium& eq,
                                        ManifoldSelect which, double cap, int n_seeds = 200);

// Floquet-bundle seeding around a saddle periodic orbit at n_seeds phases.
ManifoldPatch grow_orbit_manifold(const Params& p, const PeriodicOrbit& orbit,
                                  OrbitManifoldSelect which, double cap, int n_seeds = 200,
                                  double seed_offset = 1e-5);

// Appends the trajectories and seeds of 'extra' to 'into' (same owner).
void merge_patch(ManifoldPatch& into, ManifoldPatch&& extra);

struct CurveSet {
    struct Curve {
        std::vector<Vec3> points;
        bool closed = false;
    };
    std::vector<Curve> curves;
};

struct SphereSpec {
    Vec3 center{0.5, 0.0, 0.0};
    double R = 0.6;
};

// Sphere crossings per trajectory, strung into curves by crossing index and
// seed adjacency; curves split where consecutive points are farther apart
// than 10x the median gap. 1D patches yield single-point curves.
CurveSet intersect_with_sphere(const ManifoldPatch& patch, const SphereSpec& sphere = {});

// Ordered polylines of the first k section crossings per trajectory,
// grouped by crossing index.
CurveSet section_trace(const ManifoldPatch& patch, const SectionPlane& section,
                       int max_crossings = 3);

}  // namespace flip

#endif
