#ifndef FLIP_PROJECTION_HPP
#define FLIP_PROJECTION_HPP

#include <vector>

#include "flip/manifolds.hpp"
#include "flip/vec.hpp"

namespace flip {

struct PlanePoint {
    double x = 0.0, y = 0.0;
};

// Rotation taking the viewing sphere to the origin-centered canonical frame.
// The published frame vectors are orthonormalized by Gram-Schmidt, keeping
// the direction of the first one.
Mat3 canonical_rotation();

// x on the sphere |x - c| = R (checked to 1e-8) -> rotated sphere at origin
Vec3 rotate_to_canonical(const Vec3& x, const SphereSpec& sphere = {});
Vec3 rotate_from_canonical(const Vec3& xp, const SphereSpec& sphere = {});

// stereographic projection from the south pole onto the north tangent plane
PlanePoint stereo_project(const Vec3& xp, double R = 0.6);
Vec3 stereo_unproject(const PlanePoint& q, double R = 0.6);

// south pole of the canonical frame mapped back onto the viewing sphere
Vec3 projection_pole(const SphereSpec& sphere = {});

struct ProjectedSet {
    struct Curve {
        std::vector<PlanePoint> points;
    };
    std::vector<Curve> curves;
    int pole_splits = 0;
};

// rotate + project a curve set living on the sphere; curves passing within
// 1e-6 of the pole are split there
ProjectedSet project_set(const CurveSet& cs, const SphereSpec& sphere = {});

}  // namespace flip

#endif
