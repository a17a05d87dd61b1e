#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "subflow/errors.hpp"

namespace subflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Ambient Riemannian geometries the library works on. The hypersphere S^d
/// is represented extrinsically in R^{d+1}, with tangent vectors embedded,
/// so the metric matrix is the identity on tangent subspaces.
enum class Space { euclidean, sphere };

struct Geometry {
    Space space = Space::euclidean;
    int dim = 0;  // intrinsic dimension

    static Geometry Euclidean(int d) { return {Space::euclidean, d}; }
    static Geometry Sphere(int d) { return {Space::sphere, d}; }

    int ambient_dim() const { return space == Space::sphere ? dim + 1 : dim; }
    bool is_euclidean() const { return space == Space::euclidean; }

    void check_point(const Vec& p) const {
        if (p.size() != ambient_dim())
            throw DimensionMismatchError("point has dimension " +
                                         std::to_string(p.size()) + ", expected " +
                                         std::to_string(ambient_dim()));
    }
};

inline constexpr double kAntipodalTol = 1e-9;  // cut-locus detection on <p,q>
inline constexpr double kZeroVectorTol = 1e-14;

/// Riemannian exponential. Euclidean: p + v. Sphere: great-circle formula,
/// returning p for ||v|| below kZeroVectorTol.
inline Vec exp_map(const Geometry& geom, const Vec& p, const Vec& v) {
    geom.check_point(p);
    geom.check_point(v);
    if (geom.is_euclidean()) return p + v;
    const double n = v.norm();
    if (n < kZeroVectorTol) return p;
    return std::cos(n) * p + (std::sin(n) / n) * v;
}

/// Riemannian logarithm; inverse of exp_map away from the cut locus.
inline Vec log_map(const Geometry& geom, const Vec& p, const Vec& q) {
    geom.check_point(p);
    geom.check_point(q);
    if (geom.is_euclidean()) return q - p;
    const double c = std::clamp(p.dot(q), -1.0, 1.0);
    if (c <= -1.0 + kAntipodalTol)
        throw CutLocusError("log undefined: points are antipodal");
    Vec rej = q - c * p;
    const double rn = rej.norm();
    if (rn < kZeroVectorTol) return Vec::Zero(p.size());
    return (std::acos(c) / rn) * rej;
}

inline double geodesic_distance(const Geometry& geom, const Vec& p, const Vec& q) {
    if (geom.is_euclidean()) return (q - p).norm();
    return std::acos(std::clamp(p.dot(q), -1.0, 1.0));
}

/// Parallel transport of v from T_x to T_y along the minimizing geodesic.
/// Euclidean: identity. Sphere: rotation in the span{x, u} plane, u = log_x(y).
inline Vec parallel_transport(const Geometry& geom, const Vec& x, const Vec& y,
                              const Vec& v) {
    if (geom.is_euclidean()) return v;
    const Vec u = log_map(geom, x, y);
    const double theta = u.norm();
    if (theta < kZeroVectorTol) return v;
    const Vec uh = u / theta;
    const double a = v.dot(uh);
    return v - a * uh + a * (std::cos(theta) * uh - std::sin(theta) * x);
}

/// Metric matrix in the working basis. Extrinsic representations are
/// orthonormal, so this is the identity; non-trivial charts are exercised
/// through SphericalChart below.
inline Mat metric_matrix(const Geometry& geom, const Vec& p) {
    geom.check_point(p);
    return Mat::Identity(geom.ambient_dim(), geom.ambient_dim());
}

/// Spherical-coordinate chart on S^2 (excluding the poles), used to exercise
/// the coordinate form of tensors under a non-orthonormal basis. Coordinates
/// are (theta, phi) with theta in (0, pi).
struct SphericalChart {
    static void check_domain(double theta) {
        if (!(theta > 0.0 && theta < M_PI))
            throw ChartDomainError("spherical chart undefined at the poles");
    }

    static Mat metric(double theta, double /*phi*/ = 0.0) {
        check_domain(theta);
        Mat h(2, 2);
        h << 1.0, 0.0, 0.0, std::sin(theta) * std::sin(theta);
        return h;
    }

    static Vec embed(double theta, double phi) {
        check_domain(theta);
        Vec p(3);
        p << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta);
        return p;
    }

    // columns are d/dtheta, d/dphi at (theta, phi)
    static Mat basis(double theta, double phi) {
        check_domain(theta);
        Mat b(3, 2);
        b.col(0) << std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi),
            -std::sin(theta);
        b.col(1) << -std::sin(theta) * std::sin(phi), std::sin(theta) * std::cos(phi),
            0.0;
        return b;
    }
};

}  // namespace subflow
