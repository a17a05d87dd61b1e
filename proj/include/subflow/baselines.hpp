#pragma once

#include <Eigen/Eigenvalues>

#include "subflow/moments.hpp"

namespace subflow {

/// First principal geodesic from tangent PCA: log the observations at the
/// base point, take the top eigenvector of their (mean-centered) covariance
/// and exponentiate the spanned line across the data extent.
struct TangentPcaCurve {
    Vec base;
    Vec direction;  // unit vector in T_base
    Mat curve_points;
    double t_min = 0.0, t_max = 0.0;
    bool degenerate = false;
};

inline TangentPcaCurve tangent_pca_geodesic(const PointCloud& cloud,
                                            const Vec& base,
                                            int curve_samples = 2000) {
    const Geometry& geom = cloud.geometry();
    geom.check_point(base);
    const detail::TangentLogs tl = detail::logs_at(cloud, geom, base);
    const Vec center = tl.logs.colwise().mean().transpose();
    const Mat centered = tl.logs.rowwise() - center.transpose();
    Mat cov = Mat::Zero(centered.cols(), centered.cols());
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose(),
                                                   1.0 / double(cloud.size()));
    cov = cov.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Mat> es(cov);

    TangentPcaCurve out;
    out.base = base;
    const Eigen::Index top = cov.cols() - 1;  // ascending order
    out.direction = es.eigenvectors().col(top);
    if (es.eigenvalues()[top] < 1e-24) {
        out.degenerate = true;
        out.curve_points = base.transpose();
        return out;
    }
    const Vec proj = tl.logs * out.direction;
    out.t_min = proj.minCoeff();
    out.t_max = proj.maxCoeff();
    out.curve_points.resize(curve_samples, base.size());
    for (int i = 0; i < curve_samples; ++i) {
        const double t = out.t_min + (out.t_max - out.t_min) * double(i) /
                                         double(curve_samples - 1);
        out.curve_points.row(i) =
            exp_map(geom, base, t * out.direction).transpose();
    }
    return out;
}

/// Sum of squared geodesic distances from each observation to its nearest
/// point on the discretized curve. Refining the discretization can only
/// lower the value.
inline double sse_to_curve(const PointCloud& cloud, const Mat& curve_points,
                           const Geometry& geom) {
    if (curve_points.rows() == 0) throw ConfigError("empty curve");
    double total = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        const Vec x = cloud.point(i);
        double best = std::numeric_limits<double>::infinity();
        if (geom.space == Space::sphere) {
            // arccos is monotone, so maximize the dot product first
            const double c =
                std::clamp((curve_points * x).maxCoeff(), -1.0, 1.0);
            best = std::acos(c);
        } else {
            best = std::sqrt(
                (curve_points.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff());
        }
        total += best * best;
    }
    return total;
}

}  // namespace subflow
