#pragma once

#include <vector>

#include "subflow/cloud.hpp"
#include "subflow/geodesic.hpp"
#include "subflow/rng.hpp"

namespace subflow::testing {

inline Vec vec3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

inline Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

/// Uniform points exactly on the unit sphere S^{k} in R^{k+1}.
inline Mat sphere_points(int n, int k, std::uint64_t seed) {
    Rng rng(seed);
    Mat pts(n, k + 1);
    Vec y(k + 1);
    for (int i = 0; i < n; ++i) {
        double norm = 0.0;
        do {
            for (int c = 0; c <= k; ++c) y[c] = rng.normal();
            norm = y.norm();
        } while (norm < 1e-12);
        pts.row(i) = (y / norm).transpose();
    }
    return pts;
}

/// Dense regular grid on the z = 0 plane in R^3.
inline PointCloud planar_grid_cloud(int per_side = 41, double extent = 1.0) {
    Mat pts(per_side * per_side, 3);
    int r = 0;
    for (int i = 0; i < per_side; ++i)
        for (int j = 0; j < per_side; ++j) {
            pts(r, 0) = -extent + 2.0 * extent * double(i) / double(per_side - 1);
            pts(r, 1) = -extent + 2.0 * extent * double(j) / double(per_side - 1);
            pts(r, 2) = 0.0;
            ++r;
        }
    return PointCloud(std::move(pts));
}

/// Richardson-extrapolated central difference of H(., eta): independent
/// oracle for the implementation's finite-difference gradient.
inline Vec richardson_dp(const FrameField& field, const Vec& p, const Vec& eta,
                         double h) {
    auto central = [&](double step) {
        Vec g(p.size());
        Vec q = p;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            q[i] = p[i] + step;
            const double hp = hamiltonian(field, q, eta);
            q[i] = p[i] - step;
            const double hm = hamiltonian(field, q, eta);
            q[i] = p[i];
            g[i] = (hp - hm) / (2.0 * step);
        }
        return g;
    };
    const Vec g_h = central(h);
    const Vec g_h2 = central(h / 2.0);
    return (4.0 * g_h2 - g_h) / 3.0;
}

}  // namespace subflow::testing
