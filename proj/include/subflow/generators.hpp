#pragma once

#include <cstdint>

#include "subflow/cloud.hpp"
#include "subflow/rng.hpp"

namespace subflow {

/// S-surface sample with its ground-truth parameters: t runs along the
/// S-shaped profile, v across the width. The noiseless surface fills the
/// unit box (height = width = depth = 1); embedding coordinates beyond the
/// third are pure noise.
struct SSurfaceData {
    Mat points;   // N x d_embed
    Vec t_param;  // profile parameter in [-3pi/2, 3pi/2]
    Vec v_param;  // width parameter in [0, 1]

    PointCloud cloud() const { return PointCloud(points); }
};

inline SSurfaceData gen_s_surface_with_truth(int n, double sigma, int d_embed,
                                             std::uint64_t seed) {
    if (d_embed < 3) throw ConfigError("S-surface needs d_embed >= 3");
    if (n < 1) throw ConfigError("need at least one point");
    Rng rng(seed);
    SSurfaceData data;
    data.points = Mat::Zero(n, d_embed);
    data.t_param.resize(n);
    data.v_param.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = rng.uniform(-1.5 * M_PI, 1.5 * M_PI);
        const double v = rng.uniform();
        const double sgn = t >= 0.0 ? 1.0 : -1.0;
        data.t_param[i] = t;
        data.v_param[i] = v;
        data.points(i, 0) = 0.5 * (std::sin(t) + 1.0);
        data.points(i, 1) = v;
        data.points(i, 2) = 0.25 * (sgn * (std::cos(t) - 1.0) + 2.0);
        if (sigma > 0.0)
            for (int c = 0; c < d_embed; ++c)
                data.points(i, c) += sigma * rng.normal();
    }
    return data;
}

inline PointCloud gen_s_surface(int n, double sigma, int d_embed,
                                std::uint64_t seed) {
    return gen_s_surface_with_truth(n, sigma, d_embed, seed).cloud();
}

/// N points uniform on the k_true-dimensional unit sphere, embedded in the
/// first k_true + 1 coordinates of R^d, plus isotropic Gaussian noise of
/// marginal standard deviation sigma across all d coordinates.
inline PointCloud gen_sphere_cloud(int n, int k_true, int d, double sigma,
                                   std::uint64_t seed) {
    if (k_true + 1 > d) throw ConfigError("sphere does not fit the embedding");
    if (n < 1) throw ConfigError("need at least one point");
    Rng rng(seed);
    Mat pts = Mat::Zero(n, d);
    Vec y(k_true + 1);
    for (int i = 0; i < n; ++i) {
        double norm = 0.0;
        do {
            for (int c = 0; c <= k_true; ++c) y[c] = rng.normal();
            norm = y.norm();
        } while (norm < 1e-12);
        pts.row(i).head(k_true + 1) = (y / norm).transpose();
        if (sigma > 0.0)
            for (int c = 0; c < d; ++c) pts(i, c) += sigma * rng.normal();
    }
    return PointCloud(std::move(pts), Geometry::Euclidean(d));
}

/// Observations on S^2 scattered around the exp image of the graph of a
/// random quartic with two negative and two positive roots. sigma_var is
/// the marginal *variance* of the 2D tangent noise.
struct SphereCurveData {
    Mat points;      // N x 3, unit rows
    Mat true_curve;  // dense samples of the generating curve
    double roots[4] = {0, 0, 0, 0};
    Vec t_samples;

    PointCloud cloud() const {
        return PointCloud(points, Geometry::Sphere(2));
    }

    double polynomial(double t) const {
        return (t - roots[0]) * (t - roots[1]) * (t - roots[2]) * (t - roots[3]);
    }
};

namespace detail {

/// Deterministic orthonormal basis of the tangent plane at z on S^2.
inline void tangent_basis_s2(const Vec& z, Vec& b1, Vec& b2) {
    int axis = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(z[i]) < std::abs(z[axis])) axis = i;
    b1 = Vec::Unit(3, axis) - z[axis] * z;
    b1.normalize();
    b2 = Vec(3);
    b2 << z[1] * b1[2] - z[2] * b1[1], z[2] * b1[0] - z[0] * b1[2],
        z[0] * b1[1] - z[1] * b1[0];
}

}  // namespace detail

inline SphereCurveData gen_sphere_curve_dataset(std::uint64_t seed, int n = 100,
                                                double sigma_var = 5e-4,
                                                int curve_samples = 2000) {
    Rng rng(seed);
    SphereCurveData data;
    data.roots[0] = rng.uniform(-1.0, 0.0);
    data.roots[1] = rng.uniform(-1.0, 0.0);
    data.roots[2] = rng.uniform(0.0, 1.0);
    data.roots[3] = rng.uniform(0.0, 1.0);

    const Geometry s2 = Geometry::Sphere(2);
    Vec p0(3);
    p0 << 0.0, 0.0, 1.0;
    auto on_curve = [&](double t) {
        Vec v(3);
        v << t, data.polynomial(t), 0.0;
        return exp_map(s2, p0, v);
    };

    const double sigma_std = std::sqrt(sigma_var);
    data.points.resize(n, 3);
    data.t_samples.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = -1.0 + 2.0 * double(i) / double(n - 1);
        data.t_samples[i] = t;
        const Vec z = on_curve(t);
        Vec b1, b2;
        detail::tangent_basis_s2(z, b1, b2);
        const Vec v = sigma_std * (rng.normal() * b1 + rng.normal() * b2);
        data.points.row(i) = exp_map(s2, z, v).transpose();
    }
    data.true_curve.resize(curve_samples, 3);
    for (int i = 0; i < curve_samples; ++i) {
        const double t = -1.0 + 2.0 * double(i) / double(curve_samples - 1);
        data.true_curve.row(i) = on_curve(t).transpose();
    }
    return data;
}

/// Radius of the synthetic bumpy sphere along direction u.
inline double bumpy_radius(const Vec& u, double amplitude) {
    return 1.0 +
           amplitude * (std::sin(3.0 * u[0]) + std::sin(3.0 * u[1]) +
                        std::sin(3.0 * u[2])) /
               3.0;
}

/// Smooth closed surface in R^3 standing in for external reconstruction
/// benchmarks in the surface-reconstruction smoke test.
inline PointCloud gen_bumpy_sphere(int n, double amplitude, double noise,
                                   std::uint64_t seed) {
    Rng rng(seed);
    Mat pts(n, 3);
    Vec u(3);
    for (int i = 0; i < n; ++i) {
        double nn = 0.0;
        do {
            for (int c = 0; c < 3; ++c) u[c] = rng.normal();
            nn = u.norm();
        } while (nn < 1e-12);
        u /= nn;
        pts.row(i) = (bumpy_radius(u, amplitude) * u).transpose();
        if (noise > 0.0)
            for (int c = 0; c < 3; ++c) pts(i, c) += noise * rng.normal();
    }
    return PointCloud(std::move(pts));
}

}  // namespace subflow
