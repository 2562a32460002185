#include "flip/projection.hpp"

#include <cmath>

#include "flip/error.hpp"

namespace flip {

namespace {

Mat3 build_rotation() {
    const Vec3 u{0.5706, 0.1854, 0.0};
    const Vec3 v{1.0, -(u.x + u.z) / u.y, 1.0};
    const Vec3 w = cross(u, v);

    Vec3 r0 = normalized(u);
    Vec3 r1 = normalized(v - dot(v, r0) * r0);
    Vec3 r2 = normalized(cross(r0, r1));
    // w is parallel to r2 by construction; keep its orientation
    if (dot(r2, w) < 0.0) r2 = -r2;

    Mat3 R;
    for (int c = 0; c < 3; ++c) {
        R(0, c) = r0[c];
        R(1, c) = r1[c];
        R(2, c) = r2[c];
    }
    return R;
}

}  // namespace

Mat3 canonical_rotation() {
    static const Mat3 R = build_rotation();
    return R;
}

Vec3 rotate_to_canonical(const Vec3& x, const SphereSpec& sphere) {
    Vec3 d = x - sphere.center;
    if (std::fabs(norm(d) - sphere.R) > 1e-8)
        raise(errc::invalid_argument, "NotOnSphere: point violates the sphere equation");
    return canonical_rotation() * d;
}

Vec3 rotate_from_canonical(const Vec3& xp, const SphereSpec& sphere) {
    return transpose(canonical_rotation()) * xp + sphere.center;
}

PlanePoint stereo_project(const Vec3& xp, double R) {
    if (xp.z <= -R + 1e-9) raise(errc::invalid_argument, "AtPole: z' at the projection pole");
    return {R * xp.x / (R + xp.z), R * xp.y / (R + xp.z)};
}

Vec3 stereo_unproject(const PlanePoint& q, double R) {
    // inverse of (x', y') = (R x/(R+z), R y/(R+z)) restricted to the sphere
    double rho2 = q.x * q.x + q.y * q.y;
    double z = R * (R * R - rho2) / (R * R + rho2);
    double scale = (R + z) / R;
    return {q.x * scale, q.y * scale, z};
}

Vec3 projection_pole(const SphereSpec& sphere) {
    return rotate_from_canonical({0.0, 0.0, -sphere.R}, sphere);
}

ProjectedSet project_set(const CurveSet& cs, const SphereSpec& sphere) {
    ProjectedSet out;
    const Vec3 pole = projection_pole(sphere);
    for (const CurveSet::Curve& curve : cs.curves) {
        ProjectedSet::Curve cur;
        for (const Vec3& pt : curve.points) {
            if (norm(pt - pole) < 1e-6) {
                if (!cur.points.empty()) {
                    out.curves.push_back(cur);
                    cur = {};
                }
                out.pole_splits++;
                continue;
            }
            cur.points.push_back(stereo_project(rotate_to_canonical(pt, sphere), sphere.R));
        }
        if (!cur.points.empty()) out.curves.push_back(cur);
    }
    return out;
}

}  // namespace flip
