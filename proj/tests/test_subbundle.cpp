#include <doctest.h>

#include "subflow/subbundle.hpp"

#include "helpers.hpp"

using namespace subflow;
using namespace subflow::testing;

namespace {

FrameOptions opts_for(int k, KernelConfig kernel,
                      MomentMode mode = MomentMode::centered_cheap) {
    FrameOptions o;
    o.k = k;
    o.kernel = kernel;
    o.mode = mode;
    return o;
}

}  // namespace

TEST_CASE("planar cloud spans the xy plane") {
    const PointCloud cloud = planar_grid_cloud(15);
    const SubbundleFrame f = principal_frame(
        cloud, vec3(0.1, -0.2, 0.0), opts_for(2, KernelConfig::Gaussian(0.4)));
    CHECK((f.F.transpose() * f.F - Mat::Identity(2, 2)).norm() < 1e-9);
    Mat expected = Mat::Zero(3, 3);
    expected(0, 0) = expected(1, 1) = 1.0;
    CHECK((f.cometric() - expected).norm() < 1e-9);
    CHECK(f.eigenvalues.size() == 3);
    CHECK(f.eigenvalues[2] < 1e-15);
}

TEST_CASE("full-rank request returns the identity cometric") {
    Rng rng(2);
    Mat pts(80, 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (int c = 0; c < 3; ++c) pts(i, c) = rng.normal();
    const PointCloud cloud(pts);
    const SubbundleFrame f = principal_frame(
        cloud, vec3(0, 0, 0), opts_for(3, KernelConfig::Gaussian(1.0)));
    CHECK((f.cometric() - Mat::Identity(3, 3)).norm() < 1e-9);
}

TEST_CASE("isotropic cross cloud is singular for k = 1") {
    // direct computation: with constant weights 1/6 and zero mean, the
    // covariance of {+-e1, +-e2, +-e3} is (1/3) I, so lambda_1 = lambda_2
    Mat pts(6, 3);
    pts << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
    const PointCloud cloud(pts);
    const MomentResult mr = second_moment(cloud, vec3(0, 0, 0),
                                          KernelConfig::Constant(),
                                          MomentMode::centered_cheap);
    CHECK((mr.second_moment - Mat::Identity(3, 3) / 3.0).norm() < 1e-12);
    CHECK_THROWS_AS((void)principal_frame(cloud, vec3(0, 0, 0),
                                          opts_for(1, KernelConfig::Constant())),
                    SingularPointError);
}

TEST_CASE("cometric worked examples and rotation invariance") {
    SUBCASE("single axis") {
        SubbundleFrame f;
        f.F = Mat::Zero(3, 1);
        f.F(0, 0) = 1.0;
        f.k = 1;
        Mat expected = Mat::Zero(3, 3);
        expected(0, 0) = 1.0;
        CHECK((cometric(f) - expected).norm() == 0.0);
    }
    SUBCASE("two axes in R3") {
        SubbundleFrame f;
        f.F = Mat::Zero(3, 2);
        f.F(0, 0) = 1.0;
        f.F(1, 1) = 1.0;
        f.k = 2;
        Mat expected = Mat::Zero(3, 3);
        expected(0, 0) = expected(1, 1) = 1.0;
        CHECK((cometric(f) - expected).norm() == 0.0);
    }
    SUBCASE("right rotation of the frame leaves the projector unchanged") {
        Rng rng(9);
        Mat base(4, 2);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 2; ++c) base(r, c) = rng.normal();
        const Mat q = Eigen::HouseholderQR<Mat>(base).householderQ() *
                      Mat::Identity(4, 2);
        const double angle = 0.77;
        Mat rot(2, 2);
        rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
        SubbundleFrame f1, f2;
        f1.F = q;
        f2.F = q * rot;
        CHECK((cometric(f1) - cometric(f2)).norm() < 1e-12);
    }
}

TEST_CASE("cometric invariants: idempotent projector of trace k") {
    const PointCloud cloud = planar_grid_cloud(13);
    const SubbundleFrame f = principal_frame(
        cloud, vec3(0.2, 0.1, 0.0), opts_for(2, KernelConfig::Gaussian(0.5)));
    const Mat g = f.cometric();
    CHECK((g - g.transpose()).norm() < 1e-12);
    CHECK((g * g - g).norm() < 1e-8);
    CHECK(std::abs(g.trace() - double(f.k)) < 1e-8);
}

TEST_CASE("principal flow frame") {
    SUBCASE("coincides with the centered frame at a symmetry point") {
        const PointCloud cloud = planar_grid_cloud(11);
        const Vec center = vec3(0, 0, 0);  // grid is symmetric around 0
        const SubbundleFrame flow =
            principal_flow_frame(cloud, center, 2, KernelConfig::Constant());
        const SubbundleFrame centered = principal_frame(
            cloud, center, opts_for(2, KernelConfig::Constant()));
        CHECK((flow.cometric() - centered.cometric()).norm() < 1e-9);
    }
    SUBCASE("two-point cloud flows along the connecting axis") {
        Mat pts(2, 2);
        pts << 0.6, 0.8, -0.6, -0.8;
        const PointCloud cloud(pts);
        const SubbundleFrame f =
            principal_flow_frame(cloud, vec2(0.01, 0.0), 1, KernelConfig::Constant());
        const Vec axis = vec2(0.6, 0.8).normalized();
        CHECK(std::abs(std::abs(f.F.col(0).dot(axis)) - 1.0) < 1e-6);
    }
    SUBCASE("off-strip query tilts the uncentered frame, not the centered one") {
        // 200-point strip along e1; both moments computed explicitly
        Rng rng(31);
        Mat pts(200, 2);
        for (int i = 0; i < 200; ++i) {
            pts(i, 0) = rng.uniform(-1.0, 1.0);
            pts(i, 1) = 0.01 * rng.normal();
        }
        const PointCloud cloud(pts);
        const Vec p = vec2(0.0, 0.4);
        const KernelConfig kernel = KernelConfig::Gaussian(0.5, 0.0);

        const SubbundleFrame uncentered =
            principal_flow_frame(cloud, p, 1, kernel);
        const SubbundleFrame centered =
            principal_frame(cloud, p, opts_for(1, kernel));
        const Vec e1 = vec2(1, 0);
        const double tilt_unc =
            std::acos(std::min(1.0, std::abs(uncentered.F.col(0).dot(e1))));
        const double tilt_cen =
            std::acos(std::min(1.0, std::abs(centered.F.col(0).dot(e1))));
        CHECK(tilt_unc > tilt_cen + 1e-3);

        // oracle: the uncentered moment picks up the (x_i - p) offset
        const Vec w = weights(cloud, p, kernel);
        Mat direct = Mat::Zero(2, 2);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            const Vec diff = pts.row(i).transpose() - p;
            direct += w[i] * diff * diff.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(direct);
        const Vec top = es.eigenvectors().col(1);
        CHECK(std::abs(std::abs(top.dot(uncentered.F.col(0))) - 1.0) < 1e-9);
    }
}

TEST_CASE("projector varies linearly near a well-separated point") {
    const PointCloud cloud = planar_grid_cloud(17);
    const FrameOptions opts = opts_for(2, KernelConfig::Gaussian(0.4));
    const Vec p = vec3(0.05, 0.02, 0.0);
    const Mat g0 = principal_frame(cloud, p, opts).cometric();
    const Vec dir = vec3(0.3, -0.2, 0.1).normalized();

    double prev = -1.0;
    for (int j = 0; j < 5; ++j) {
        const double eps = 0.02 / double(1 << j);
        const Mat g1 = principal_frame(cloud, p + eps * dir, opts).cometric();
        const double dist = (g1 - g0).norm();
        if (prev > 0.0) {
            const double ratio = dist / prev;
            CHECK(ratio > 0.3);
            CHECK(ratio < 0.7);
        }
        prev = dist;
    }
}

TEST_CASE("sphere frames are tangent after transport") {
    const Geometry s2 = Geometry::Sphere(2);
    const Mat pts = sphere_points(400, 2, 41);
    const PointCloud cloud(pts, s2);
    const FrameOptions opts = opts_for(2, KernelConfig::Gaussian(0.3));

    const Mat queries = sphere_points(10, 2, 57);
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const Vec p = queries.row(i).transpose();
        const SubbundleFrame f = principal_frame(cloud, p, opts);
        CHECK((f.base - p).norm() < 1e-12);
        for (int c = 0; c < f.k; ++c)
            CHECK(std::abs(f.F.col(c).dot(p)) < 1e-9);
        CHECK((f.F.transpose() * f.F - Mat::Identity(2, 2)).norm() < 1e-9);
    }
}

TEST_CASE("off-sphere queries are projected radially") {
    const Geometry s2 = Geometry::Sphere(2);
    const Mat pts = sphere_points(300, 2, 43);
    const PointCloud cloud(pts, s2);
    const FrameOptions opts = opts_for(2, KernelConfig::Gaussian(0.3));
    const Vec p = vec3(0.3, -0.5, 0.81);
    const SubbundleFrame inside = principal_frame(cloud, p, opts);
    const SubbundleFrame on = principal_frame(cloud, p.normalized(), opts);
    CHECK((inside.F - on.F).norm() < 1e-12);
    CHECK((inside.base - p.normalized()).norm() < 1e-12);
}

TEST_CASE("tangent-space approximation stays close to the transported frame") {
    const Geometry s2 = Geometry::Sphere(2);
    const Mat pts = sphere_points(500, 2, 47);
    const PointCloud cloud(pts, s2);
    FrameOptions exact = opts_for(2, KernelConfig::Gaussian(0.25));
    FrameOptions approx = exact;
    approx.tangent_approximation = true;

    const Vec p = vec3(0, 0, 1);
    const SubbundleFrame fe = principal_frame(cloud, p, exact);
    const SubbundleFrame fa = principal_frame(cloud, p, approx);
    for (int c = 0; c < 2; ++c) CHECK(std::abs(fa.F.col(c).dot(p)) < 1e-9);
    CHECK((fe.cometric() - fa.cometric()).norm() < 0.05);
}

TEST_CASE("deterministic column signs") {
    const PointCloud cloud = planar_grid_cloud(9);
    const SubbundleFrame f = principal_frame(
        cloud, vec3(0, 0, 0), opts_for(2, KernelConfig::Gaussian(0.6)));
    for (int c = 0; c < f.k; ++c) {
        Eigen::Index imax = 0;
        f.F.col(c).cwiseAbs().maxCoeff(&imax);
        CHECK(f.F(imax, c) > 0.0);
    }
}

TEST_CASE("frame rank is validated") {
    const PointCloud cloud = planar_grid_cloud(5);
    CHECK_THROWS_AS((void)principal_frame(cloud, vec3(0, 0, 0),
                                          opts_for(0, KernelConfig::Constant())),
                    ConfigError);
    CHECK_THROWS_AS((void)principal_frame(cloud, vec3(0, 0, 0),
                                          opts_for(4, KernelConfig::Constant())),
                    ConfigError);
}
