#pragma once

#include <limits>
#include <utility>

#include <Eigen/Eigenvalues>

#include "subflow/moments.hpp"

namespace subflow {

/// Orthonormal frame spanning the top-k eigenspace of a local second moment,
/// together with the full (descending) eigenvalue list and the k-th spectral
/// gap. For sphere geometries everything is extrinsic, so F is (d+1) x k.
struct SubbundleFrame {
    Vec base;
    Mat F;
    Vec eigenvalues;  // descending
    double gap = 0.0;
    int k = 0;

    Mat cometric() const { return F * F.transpose(); }
};

/// Rank-k projection matrix g* = F F^T.
inline Mat cometric(const SubbundleFrame& frame) { return frame.cometric(); }

struct FrameOptions {
    int k = 1;
    KernelConfig kernel;
    MomentMode mode = MomentMode::centered_cheap;
    double gap_rel_tol = 1e-10;  // singular when gap <= tol * lambda_1
    // Approximate the manifold construction with a single log batch in T_p
    // and no parallel transport.
    bool tangent_approximation = false;
};

namespace detail {

// Flip each column so its largest-magnitude entry is positive; ties broken
// by lowest index. Keeps stored frames reproducible; the cometric is
// sign-invariant either way.
inline void fix_column_signs(Mat& F) {
    for (Eigen::Index j = 0; j < F.cols(); ++j) {
        Eigen::Index best = 0;
        double best_abs = std::abs(F(0, j));
        for (Eigen::Index i = 1; i < F.rows(); ++i) {
            if (std::abs(F(i, j)) > best_abs) {
                best = i;
                best_abs = std::abs(F(i, j));
            }
        }
        if (F(best, j) < 0.0) F.col(j) = -F.col(j);
    }
}

}  // namespace detail

/// Frame of the principal subbundle at p. Euclidean: top-k eigenvectors of
/// the local second moment (whose centering follows `mode`). Sphere: the
/// moment is eigendecomposed at the local mean and the frame is parallel
/// transported back to p; off-sphere queries are projected radially first.
inline SubbundleFrame principal_frame(const PointCloud& cloud, const Vec& p_in,
                                      const FrameOptions& opts) {
    const Geometry& geom = cloud.geometry();
    geom.check_point(p_in);
    const int da = geom.ambient_dim();
    if (opts.k < 1 || opts.k > da)
        throw ConfigError("frame rank k out of range");

    Vec p = p_in;
    if (geom.space == Space::sphere) {
        const double n = p.norm();
        if (!(n > 0.0)) throw ConfigError("zero query point on the sphere");
        p /= n;
    }

    MomentResult mr;
    bool needs_transport = false;
    if (!geom.is_euclidean() && opts.tangent_approximation) {
        const detail::TangentLogs tl = detail::logs_at(cloud, geom, p);
        PointCloud tangent_cloud(tl.logs);
        mr = second_moment(tangent_cloud, Vec::Zero(da), opts.kernel, opts.mode);
    } else {
        mr = second_moment(cloud, p, opts.kernel, opts.mode);
        needs_transport =
            !geom.is_euclidean() && opts.mode != MomentMode::uncentered;
    }

    Eigen::SelfAdjointEigenSolver<Mat> es(mr.second_moment);
    if (es.info() != Eigen::Success)
        throw Error("eigendecomposition failed");
    Vec evals = es.eigenvalues().reverse();
    Mat evecs = es.eigenvectors().rowwise().reverse();

    const double lam1 = std::max(evals[0], 0.0);
    double gap;
    if (opts.k < da) {
        gap = evals[opts.k - 1] - evals[opts.k];
        if (gap <= opts.gap_rel_tol * lam1)
            throw SingularPointError(
                "singular point: eigenvalue gap " + std::to_string(gap) +
                " at rank " + std::to_string(opts.k));
    } else {
        gap = evals[opts.k - 1];
    }

    Mat F = evecs.leftCols(opts.k);
    if (needs_transport) {
        for (Eigen::Index j = 0; j < F.cols(); ++j)
            F.col(j) = parallel_transport(geom, mr.mean, p, F.col(j));
    }
    detail::fix_column_signs(F);

    return SubbundleFrame{p, std::move(F), std::move(evals), gap, opts.k};
}

/// Uncentered baseline: second moment centered around p itself, no mean
/// shift, no transport (the rank-k principal-flow field).
inline SubbundleFrame principal_flow_frame(const PointCloud& cloud, const Vec& p,
                                           int k, const KernelConfig& kernel) {
    FrameOptions opts;
    opts.k = k;
    opts.kernel = kernel;
    opts.mode = MomentMode::uncentered;
    return principal_frame(cloud, p, opts);
}

/// A field of subbundle frames over the ambient space. Implementations must
/// be safe for concurrent `at` calls.
class FrameField {
  public:
    virtual ~FrameField() = default;
    virtual SubbundleFrame at(const Vec& p) const = 0;
    virtual const Geometry& geometry() const = 0;
    int ambient_dim() const { return geometry().ambient_dim(); }

    // Data support, used by the integrator's divergence guard. An infinite
    // radius disables the guard.
    virtual Vec support_center() const {
        return Vec::Zero(geometry().ambient_dim());
    }
    virtual double support_radius() const {
        return std::numeric_limits<double>::infinity();
    }
};

/// Principal subbundle estimated from a point cloud.
class PrincipalFrameField : public FrameField {
  public:
    PrincipalFrameField(PointCloud cloud, FrameOptions opts)
        : cloud_(std::move(cloud)), opts_(opts) {
        opts_.kernel.validate();
    }

    SubbundleFrame at(const Vec& p) const override {
        return principal_frame(cloud_, p, opts_);
    }
    const Geometry& geometry() const override { return cloud_.geometry(); }
    Vec support_center() const override { return cloud_.centroid(); }
    double support_radius() const override { return cloud_.bounding_radius(); }

    const PointCloud& cloud() const { return cloud_; }
    const FrameOptions& options() const { return opts_; }

  private:
    PointCloud cloud_;
    FrameOptions opts_;
};

/// Exact tangent planes of the unit sphere S^d, bypassing any estimation.
/// The frame basis depends discontinuously on the axis selection, but the
/// cometric I - p p^T it spans is smooth, which is all the dynamics see.
class AnalyticSphereFrameField : public FrameField {
  public:
    explicit AnalyticSphereFrameField(int intrinsic_dim, int k = -1)
        : geom_(Geometry::Sphere(intrinsic_dim)),
          k_(k < 0 ? intrinsic_dim : k) {
        if (k_ < 1 || k_ > intrinsic_dim)
            throw ConfigError("analytic sphere frame rank out of range");
    }

    SubbundleFrame at(const Vec& q) const override {
        geom_.check_point(q);
        const Vec p = q.normalized();
        const int da = geom_.ambient_dim();
        Mat F(da, k_);
        int col = 0;
        for (int axis = 0; axis < da && col < k_; ++axis) {
            Vec v = Vec::Unit(da, axis) - p[axis] * p;
            for (int j = 0; j < col; ++j) v -= v.dot(F.col(j)) * F.col(j);
            const double n = v.norm();
            if (n < 1e-8) continue;
            F.col(col++) = v / n;
        }
        if (col != k_) throw Error("failed to build tangent basis");
        detail::fix_column_signs(F);
        Vec evals = Vec::Zero(da);
        evals.head(geom_.dim).setOnes();
        return SubbundleFrame{p, std::move(F), std::move(evals), 1.0, k_};
    }

    const Geometry& geometry() const override { return geom_; }
    double support_radius() const override { return 1.0; }

  private:
    Geometry geom_;
    int k_;
};

/// Position-independent frame on Euclidean space (k = d gives the identity
/// cometric; geodesics are straight lines).
class ConstantFrameField : public FrameField {
  public:
    explicit ConstantFrameField(Mat F)
        : geom_(Geometry::Euclidean(int(F.rows()))), F_(std::move(F)) {
        if ((F_.transpose() * F_ - Mat::Identity(F_.cols(), F_.cols())).norm() >
            1e-9)
            throw ConfigError("constant frame must have orthonormal columns");
    }

    static ConstantFrameField FullRank(int d) {
        return ConstantFrameField(Mat::Identity(d, d));
    }

    SubbundleFrame at(const Vec& p) const override {
        geom_.check_point(p);
        Vec evals = Vec::Zero(F_.rows());
        evals.head(F_.cols()).setOnes();
        return SubbundleFrame{p, F_, std::move(evals), 1.0, int(F_.cols())};
    }

    const Geometry& geometry() const override { return geom_; }

  private:
    Geometry geom_;
    Mat F_;
};

}  // namespace subflow
