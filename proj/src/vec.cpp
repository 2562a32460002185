#include "flip/vec.hpp"

#include <algorithm>
#include <cmath>

namespace flip {

bool solve3(const Mat3& A, const Vec3& b, Vec3& x, double eps) {
    double m[3][4] = {{A(0, 0), A(0, 1), A(0, 2), b.x},
                      {A(1, 0), A(1, 1), A(1, 2), b.y},
                      {A(2, 0), A(2, 1), A(2, 2), b.z}};
    for (int k = 0; k < 3; ++k) {
        int piv = k;
        for (int r = k + 1; r < 3; ++r)
            if (std::fabs(m[r][k]) > std::fabs(m[piv][k])) piv = r;
        if (std::fabs(m[piv][k]) < eps) return false;
        if (piv != k)
            for (int c = k; c < 4; ++c) std::swap(m[piv][c], m[k][c]);
        for (int r = k + 1; r < 3; ++r) {
            double f = m[r][k] / m[k][k];
            for (int c = k; c < 4; ++c) m[r][c] -= f * m[k][c];
        }
    }
    double v[3];
    for (int k = 2; k >= 0; --k) {
        double s = m[k][3];
        for (int c = k + 1; c < 3; ++c) s -= m[k][c] * v[c];
        v[k] = s / m[k][k];
    }
    x = {v[0], v[1], v[2]};
    return true;
}

}  // namespace flip
