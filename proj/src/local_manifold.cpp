#include "flip/local_manifold.hpp"

#include <cmath>

#include "flip/error.hpp"

namespace flip {

namespace {

// dense bivariate polynomial in (s, t), coefficients c[i][j] for s^i t^j
struct Poly2 {
    int n = 0;  // max total degree
    std::vector<double> c;

    explicit Poly2(int order) : n(order), c((order + 1) * (order + 1), 0.0) {}

    double& at(int i, int j) { return c[i * (n + 1) + j]; }
    double at(int i, int j) const { return c[i * (n + 1) + j]; }

    void add_scaled(const Poly2& other, double f) {
        for (std::size_t k = 0; k < c.size(); ++k) c[k] += f * other.c[k];
    }
};

Poly2 mul(const Poly2& a, const Poly2& b) {
    Poly2 r(a.n);
    for (int i = 0; i <= a.n; ++i)
        for (int j = 0; j + i <= a.n; ++j) {
            double av = a.at(i, j);
            if (av == 0.0) continue;
            for (int k = 0; i + k <= a.n; ++k)
                for (int l = 0; i + j + k + l <= a.n; ++l) {
                    double bv = b.at(k, l);
                    if (bv != 0.0) r.at(i + k, j + l) += av * bv;
                }
        }
    return r;
}

}  // namespace

StableGraph::StableGraph(const Params& p, int order) : order_(order) {
    eig_ = origin_eigens(p);
    for (int r = 0; r < 3; ++r) {
        E_(r, 0) = eig_.e_ss[r];
        E_(r, 1) = eig_.e_s[r];
        E_(r, 2) = eig_.e_u[r];
    }
    // rows of E^-1: solve E^T r = unit vectors
    Mat3 Et = transpose(E_);
    for (int r = 0; r < 3; ++r) {
        Vec3 rhs{r == 0 ? 1.0 : 0.0, r == 1 ? 1.0 : 0.0, r == 2 ? 1.0 : 0.0};
        Vec3 row_r;
        if (!solve3(Et, rhs, row_r)) raise(errc::not_a_saddle, "singular eigenbasis");
        for (int c = 0; c < 3; ++c) E_inv_(r, c) = row_r[c];
    }

    h_.assign((order_ + 1) * (order_ + 1), 0.0);

    const double lss = eig_.lambda_ss, ls = eig_.lambda_s, lu = eig_.lambda_u;

    // nonlinear field terms beyond the Jacobian at the origin, as functions
    // of (x, y, z); evaluated on polynomials below
    auto nonlinear = [&p](const Poly2& x, const Poly2& y, const Poly2& z, Poly2& fx, Poly2& fy,
                          Poly2& fz) {
        const int n = x.n;
        Poly2 xx = mul(x, x);
        Poly2 xy = mul(x, y);
        Poly2 xz = mul(x, z);
        Poly2 yy = mul(y, y);
        Poly2 yz = mul(y, z);
        Poly2 xxx = mul(xx, x);
        Poly2 xxz = mul(xx, z);

        fx = Poly2(n);
        fx.add_scaled(xx, -p.a - 3.0 * p.mu_tilde);
        fx.add_scaled(xz, -2.0 * p.alpha);
        fx.add_scaled(xxz, 3.0 * p.alpha);

        fy = Poly2(n);
        fy.add_scaled(xx, -1.5 * p.b);
        fy.add_scaled(xy, -1.5 * p.a);
        fy.add_scaled(yz, 2.0 * p.alpha);

        fz = Poly2(n);
        fz.add_scaled(xz, p.gamma);
        fz.add_scaled(xx, p.alpha * p.beta);
        fz.add_scaled(xxx, -p.alpha * p.beta);
        fz.add_scaled(yy, -p.alpha * p.beta);
    };

    // solve degree by degree: (i lss + j ls - lu) h_ij = degree-n residual
    for (int deg = 2; deg <= order_; ++deg) {
        // phase-space coordinates as bivariate polynomials of (c_ss, c_s)
        // with the current partial graph
        Poly2 cs(order_), ct(order_), hpoly(order_);
        cs.at(1, 0) = 1.0;
        ct.at(0, 1) = 1.0;
        for (int i = 0; i <= order_; ++i)
            for (int j = 0; i + j <= order_; ++j) hpoly.at(i, j) = hij(i, j);

        Poly2 x(order_), y(order_), z(order_);
        for (auto [comp, poly] : {std::pair<int, Poly2*>{0, &x}, {1, &y}, {2, &z}}) {
            poly->add_scaled(cs, E_(comp, 0));
            poly->add_scaled(ct, E_(comp, 1));
            poly->add_scaled(hpoly, E_(comp, 2));
        }

        Poly2 fx(order_), fy(order_), fz(order_);
        nonlinear(x, y, z, fx, fy, fz);

        // eigen components of the nonlinearity
        Poly2 g_ss(order_), g_s(order_), g_u(order_);
        for (auto [row_i, g] :
             {std::pair<int, Poly2*>{0, &g_ss}, {1, &g_s}, {2, &g_u}}) {
            g->add_scaled(fx, E_inv_(row_i, 0));
            g->add_scaled(fy, E_inv_(row_i, 1));
            g->add_scaled(fz, E_inv_(row_i, 2));
        }

        // dh/d(c_ss) * g_ss + dh/d(c_s) * g_s
        Poly2 dh_dss(order_), dh_ds(order_);
        for (int i = 1; i <= order_; ++i)
            for (int j = 0; i + j <= order_; ++j) dh_dss.at(i - 1, j) = i * hpoly.at(i, j);
        for (int i = 0; i <= order_; ++i)
            for (int j = 1; i + j <= order_; ++j) dh_ds.at(i, j - 1) = j * hpoly.at(i, j);

        Poly2 transport = mul(dh_dss, g_ss);
        Poly2 t2 = mul(dh_ds, g_s);
        transport.add_scaled(t2, 1.0);

        for (int i = 0; i <= deg; ++i) {
            int j = deg - i;
            double rhs = g_u.at(i, j) - transport.at(i, j);
            double denom = i * lss + j * ls - lu;
            hij(i, j) = rhs / denom;
        }
    }
}

Vec3 StableGraph::eigen_coords(const Vec3& offset) const { return E_inv_ * offset; }

double StableGraph::height(double c_ss, double c_s) const {
    double acc = 0.0;
    // Horner-free accumulation; the coefficient count is tiny
    for (int i = 0; i <= order_; ++i) {
        double pi = std::pow(c_ss, i);
        for (int j = 0; i + j <= order_; ++j) {
            double v = hij(i, j);
            if (v != 0.0) acc += v * pi * std::pow(c_s, j);
        }
    }
    return acc;
}

double StableGraph::d_height_dss(double c_ss, double c_s) const {
    double acc = 0.0;
    for (int i = 1; i <= order_; ++i) {
        double pi = i * std::pow(c_ss, i - 1);
        for (int j = 0; i + j <= order_; ++j) {
            double v = hij(i, j);
            if (v != 0.0) acc += v * pi * std::pow(c_s, j);
        }
    }
    return acc;
}

double StableGraph::d_height_ds(double c_ss, double c_s) const {
    double acc = 0.0;
    for (int i = 0; i <= order_; ++i) {
        double pi = std::pow(c_ss, i);
        for (int j = 1; i + j <= order_; ++j) {
            double v = hij(i, j);
            if (v != 0.0) acc += v * pi * j * std::pow(c_s, j - 1);
        }
    }
    return acc;
}

Vec3 StableGraph::tangent_along_ss(double c_ss, double c_s) const {
    return eig_.e_ss + d_height_dss(c_ss, c_s) * eig_.e_u;
}

Vec3 StableGraph::tangent_along_s(double c_ss, double c_s) const {
    return eig_.e_s + d_height_ds(c_ss, c_s) * eig_.e_u;
}

double StableGraph::invariance_defect(const Params& p, double radius, int n_samples) const {
    double worst = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        double phi = 2.0 * M_PI * k / n_samples;
        double c_ss = radius * std::sin(phi);
        double c_s = radius * std::cos(phi);
        double h = height(c_ss, c_s);
        Vec3 state = c_ss * eig_.e_ss + c_s * eig_.e_s + h * eig_.e_u;
        Vec3 f = eval_field(p, state);
        Vec3 g = eigen_coords(f);
        // graph invariance: c_u' = dh/dc_ss * c_ss' + dh/dc_s * c_s'
        const double dd = 1e-7;
        double dh_dss = (height(c_ss + dd, c_s) - height(c_ss - dd, c_s)) / (2 * dd);
        double dh_ds = (height(c_ss, c_s + dd) - height(c_ss, c_s - dd)) / (2 * dd);
        double defect = std::fabs(g.z - dh_dss * g.x - dh_ds * g.y);
        worst = std::max(worst, defect);
    }
    return worst;
}

}  // namespace flip
