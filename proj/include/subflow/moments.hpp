#pragma once

#include <vector>

#include "subflow/cloud.hpp"

namespace subflow {

/// How the local second moment is centered and weighted.
///  - centered_recomputed: weights re-evaluated at the local mean m(p),
///    differences taken against m(p).
///  - centered_cheap: weights kept at p, differences against m(p).
///  - uncentered: weights at p, differences against p itself (the
///    principal-flow variant).
enum class MomentMode { centered_recomputed, centered_cheap, uncentered };

struct MomentResult {
    Vec weights;        // simplex weights used in the second-moment sum
    Vec mean;           // the centering point (m(p), or p for uncentered)
    Mat second_moment;  // symmetric PSD
};

/// Coordinate representation of the tensor v (x) u under metric h: v u^T h.
/// Reduces to the plain outer product when the basis is orthonormal (h = I).
inline Mat tensor_coordinates(const Vec& v, const Vec& u, const Mat& h) {
    if (v.size() != u.size() || h.rows() != h.cols() || h.rows() != v.size())
        throw DimensionMismatchError("tensor_coordinates: incompatible dimensions");
    return v * (h * u).transpose();
}

namespace detail {

inline Vec raw_kernel_values(const Vec& sq_dists, const KernelConfig& kc) {
    kc.validate();
    if (kc.kind == KernelKind::constant)
        return Vec::Ones(sq_dists.size());
    return (-sq_dists.array() / (2.0 * kc.alpha * kc.alpha)).exp();
}

/// Normalize, zero entries below cutoff, renormalize.
inline Vec normalize_with_cutoff(Vec raw, const KernelConfig& kc) {
    const double total = raw.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw EmptyNeighborhoodError("all kernel values underflowed");
    raw /= total;
    if (kc.cutoff > 0.0) {
        const double kept = (raw.array() >= kc.cutoff)
                                .select(raw.array(), 0.0)
                                .sum();
        if (!(kept > 0.0))
            throw EmptyNeighborhoodError("no weight above cutoff");
        raw = (raw.array() >= kc.cutoff).select(raw.array() / kept, 0.0);
    }
    return raw;
}

inline Vec euclid_sq_dists(const PointCloud& cloud, const Vec& p) {
    Vec sq = cloud.squared_norms() - 2.0 * (cloud.points() * p);
    sq.array() += p.squaredNorm();
    return sq.cwiseMax(0.0);
}

/// Logs of every observation at p, with their norms (= geodesic distances).
struct TangentLogs {
    Mat logs;  // N x d', row i = log_p(x_i)
    Vec dists;
};

inline TangentLogs logs_at(const PointCloud& cloud, const Geometry& geom,
                           const Vec& p) {
    TangentLogs out;
    const Mat& X = cloud.points();
    if (geom.is_euclidean()) {
        out.logs = X.rowwise() - p.transpose();
        out.dists = out.logs.rowwise().norm();
        return out;
    }
    Vec dots = (X * p).cwiseMin(1.0).cwiseMax(-1.0);
    if ((dots.array() <= -1.0 + kAntipodalTol).any())
        throw CutLocusError("an observation is antipodal to the query point");
    out.logs.resize(X.rows(), X.cols());
    out.dists.resize(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double c = dots[i];
        Vec rej = X.row(i).transpose() - c * p;
        const double rn = rej.norm();
        const double theta = std::acos(c);
        out.dists[i] = theta;
        if (rn < kZeroVectorTol)
            out.logs.row(i).setZero();
        else
            out.logs.row(i) = (theta / rn) * rej.transpose();
    }
    return out;
}

/// Weighted covariance of rows, centered at `center`, restricted to rows
/// with nonzero weight.
inline Mat weighted_outer_sum(const Mat& rows, const Vec& w, const Vec& center) {
    std::vector<Eigen::Index> nz;
    nz.reserve(rows.rows());
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (w[i] > 0.0) nz.push_back(i);
    Mat b(Eigen::Index(nz.size()), rows.cols());
    for (Eigen::Index r = 0; r < b.rows(); ++r)
        b.row(r) = std::sqrt(w[nz[std::size_t(r)]]) *
                   (rows.row(nz[std::size_t(r)]) - center.transpose());
    Mat sigma = Mat::Zero(rows.cols(), rows.cols());
    sigma.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
    return sigma.selfadjointView<Eigen::Lower>();
}

/// Reference manifold pipeline. Works for both geometries via exp/log;
/// with a Euclidean geometry it reproduces the fast path to ~1e-12.
inline MomentResult second_moment_generic(const PointCloud& cloud,
                                          const Geometry& geom, const Vec& p,
                                          const KernelConfig& kc,
                                          MomentMode mode) {
    const TangentLogs at_p = logs_at(cloud, geom, p);
    const Vec w_p =
        normalize_with_cutoff(raw_kernel_values(at_p.dists.array().square(), kc), kc);

    MomentResult out;
    if (mode == MomentMode::uncentered) {
        out.weights = w_p;
        out.mean = p;
        out.second_moment = weighted_outer_sum(at_p.logs, w_p, Vec::Zero(p.size()));
        return out;
    }

    const Vec tangent_mean = at_p.logs.transpose() * w_p;
    const Vec m = exp_map(geom, p, tangent_mean);
    const TangentLogs at_m = logs_at(cloud, geom, m);
    Vec w_used = w_p;
    if (mode == MomentMode::centered_recomputed)
        w_used = normalize_with_cutoff(
            raw_kernel_values(at_m.dists.array().square(), kc), kc);
    out.weights = w_used;
    out.mean = m;
    out.second_moment =
        weighted_outer_sum(at_m.logs, w_used, Vec::Zero(p.size()));
    return out;
}

}  // namespace detail

/// Normalized kernel weights of every observation relative to p.
inline Vec weights(const PointCloud& cloud, const Vec& p, const KernelConfig& kc) {
    cloud.geometry().check_point(p);
    Vec sq;
    if (cloud.geometry().is_euclidean()) {
        sq = detail::euclid_sq_dists(cloud, p);
    } else {
        sq = detail::logs_at(cloud, cloud.geometry(), p).dists.array().square();
    }
    return detail::normalize_with_cutoff(detail::raw_kernel_values(sq, kc), kc);
}

/// Kernel-weighted local mean. Euclidean: sum w_i x_i. Manifold:
/// exp_p of the weighted tangent mean.
inline Vec local_mean(const PointCloud& cloud, const Vec& p,
                      const KernelConfig& kc) {
    const Vec w = weights(cloud, p, kc);
    if (cloud.geometry().is_euclidean())
        return cloud.points().transpose() * w;
    const detail::TangentLogs tl = detail::logs_at(cloud, cloud.geometry(), p);
    return exp_map(cloud.geometry(), p, tl.logs.transpose() * w);
}

/// Kernel-weighted local second moment around p in the requested mode.
inline MomentResult second_moment(const PointCloud& cloud, const Vec& p,
                                  const KernelConfig& kc, MomentMode mode) {
    cloud.geometry().check_point(p);
    if (!cloud.geometry().is_euclidean())
        return detail::second_moment_generic(cloud, cloud.geometry(), p, kc, mode);

    // Euclidean fast path; avoids forming the N x d log matrix.
    const Mat& X = cloud.points();
    const Vec w_p = detail::normalize_with_cutoff(
        detail::raw_kernel_values(detail::euclid_sq_dists(cloud, p), kc), kc);

    MomentResult out;
    if (mode == MomentMode::uncentered) {
        out.weights = w_p;
        out.mean = p;
        out.second_moment = detail::weighted_outer_sum(X, w_p, p);
        return out;
    }
    const Vec m = X.transpose() * w_p;
    Vec w_used = w_p;
    if (mode == MomentMode::centered_recomputed)
        w_used = detail::normalize_with_cutoff(
            detail::raw_kernel_values(detail::euclid_sq_dists(cloud, m), kc), kc);
    out.weights = w_used;
    out.mean = m;
    out.second_moment = detail::weighted_outer_sum(X, w_used, m);
    return out;
}

}  // namespace subflow
