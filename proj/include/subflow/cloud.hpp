#pragma once

#include <string>
#include <utility>

#include "subflow/geometry.hpp"

namespace subflow {

/// Immutable set of ambient points (one per row) with a geometry tag.
class PointCloud {
  public:
    PointCloud(Mat points, Geometry geom)
        : pts_(std::move(points)), geom_(geom) {
        if (pts_.cols() != geom_.ambient_dim())
            throw DimensionMismatchError(
                "cloud has " + std::to_string(pts_.cols()) +
                " columns, geometry expects " + std::to_string(geom_.ambient_dim()));
        if (geom_.space == Space::sphere) {
            for (Eigen::Index i = 0; i < pts_.rows(); ++i) {
                if (std::abs(pts_.row(i).norm() - 1.0) > 1e-9)
                    throw DimensionMismatchError(
                        "sphere cloud row " + std::to_string(i) +
                        " is not unit norm");
            }
        }
        sq_norms_ = pts_.rowwise().squaredNorm();
        centroid_ = pts_.colwise().mean().transpose();
        bounding_radius_ =
            (pts_.rowwise() - centroid_.transpose()).rowwise().norm().maxCoeff();
    }

    explicit PointCloud(Mat points)
        : PointCloud(std::move(points),
                     Geometry::Euclidean(int(points.cols()))) {}

    Eigen::Index size() const { return pts_.rows(); }
    int ambient_dim() const { return int(pts_.cols()); }
    const Geometry& geometry() const { return geom_; }
    const Mat& points() const { return pts_; }
    Vec point(Eigen::Index i) const { return pts_.row(i).transpose(); }

    // cached helpers for kernel evaluation
    const Vec& squared_norms() const { return sq_norms_; }
    const Vec& centroid() const { return centroid_; }
    double bounding_radius() const { return bounding_radius_; }

  private:
    Mat pts_;
    Geometry geom_;
    Vec sq_norms_;
    Vec centroid_;
    double bounding_radius_ = 0.0;
};

enum class KernelKind {
    gaussian,  // K_a(t) = exp(-t^2 / (2 a^2))
    constant,  // K == 1, the a -> infinity limit
};

struct KernelConfig {
    KernelKind kind = KernelKind::gaussian;
    double alpha = 1.0;    // kernel range (standard deviation of the Gaussian)
    double cutoff = 1e-5;  // normalized weights below this are zeroed

    static KernelConfig Gaussian(double alpha, double cutoff = 1e-5) {
        return {KernelKind::gaussian, alpha, cutoff};
    }
    static KernelConfig Constant(double cutoff = 0.0) {
        return {KernelKind::constant, 1.0, cutoff};
    }

    void validate() const {
        if (kind == KernelKind::gaussian && !(alpha > 0.0))
            throw ConfigError("kernel range alpha must be positive");
        if (!(cutoff >= 0.0 && cutoff < 1.0))
            throw ConfigError("kernel cutoff must lie in [0, 1)");
    }
};

}  // namespace subflow
