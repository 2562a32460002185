#ifndef FLIP_LOCAL_MANIFOLD_HPP
#define FLIP_LOCAL_MANIFOLD_HPP

#include <vector>

#include "flip/model.hpp"

namespace flip {

// Local stable manifold of the origin as a Taylor graph in eigen-coordinates:
// c_u = h(c_ss, c_s) with h = sum h_ij c_ss^i c_s^j, 2 <= i+j <= order,
// solved degree by degree from the graph invariance equation. The saddle has
// no resonances i*lambda_ss + j*lambda_s = lambda_u, so every denominator is
// bounded away from zero.
class StableGraph {
public:
    StableGraph(const Params& p, int order = 10);

    // offset from the equilibrium -> eigen coordinates (c_ss, c_s, c_u)
    Vec3 eigen_coords(const Vec3& offset) const;

    // graph height at (c_ss, c_s)
    double height(double c_ss, double c_s) const;

    // partial derivatives of the graph height
    double d_height_dss(double c_ss, double c_s) const;
    double d_height_ds(double c_ss, double c_s) const;

    // tangent vectors of the graph surface at a point given in eigen coords
    Vec3 tangent_along_ss(double c_ss, double c_s) const;
    Vec3 tangent_along_s(double c_ss, double c_s) const;

    // signed transverse distance of a phase-space point from the local graph
    double residual(const Vec3& state) const {
        Vec3 c = eigen_coords(state);
        return c.z - height(c.x, c.y);
    }

    // max invariance defect of the truncated graph on a test circle of the
    // given radius (diagnostic for the usable neighborhood)
    double invariance_defect(const Params& p, double radius, int n_samples = 64) const;

    const EigenData& eigen() const { return eig_; }

private:
    int order_;
    EigenData eig_;
    Mat3 E_;      // columns e_ss, e_s, e_u
    Mat3 E_inv_;  // rows of the dual basis
    std::vector<double> h_;  // dense (order+1)x(order+1), index i*(order+1)+j

    double& hij(int i, int j) { return h_[i * (order_ + 1) + j]; }
    double hij(int i, int j) const { return h_[i * (order_ + 1) + j]; }
};

}  // namespace flip

#endif
