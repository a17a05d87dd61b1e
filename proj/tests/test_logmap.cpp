#include <doctest.h>

#include "subflow/generators.hpp"
#include "subflow/logmap.hpp"

#include "helpers.hpp"

using namespace subflow;
using namespace subflow::testing;

namespace {

LogOptions quick_opts() {
    LogOptions o;
    o.random_restarts = 1;
    o.max_iterations = 80;
    o.coarse_step = 0.02;
    return o;
}

}  // namespace

TEST_CASE("log of the base point is zero") {
    const PointCloud cloud = planar_grid_cloud(15);
    FrameOptions fo;
    fo.k = 2;
    fo.kernel = KernelConfig::Gaussian(0.45);
    const PrincipalFrameField field(cloud, fo);

    const Vec p = vec3(0.1, -0.1, 0.0);
    for (LogSpace space : {LogSpace::full_cotangent, LogSpace::dual_subbundle}) {
        LogOptions opts = quick_opts();
        opts.space = space;
        const LogResult lr = sr_log(field, p, p, opts);
        CHECK(lr.eta_hat.norm() < 1e-6);
        CHECK(lr.residual < 1e-6);
        CHECK(lr.hamiltonian < 1e-12);
        CHECK(lr.converged);
    }
}

TEST_CASE("shoot-then-invert roundtrip on a dense planar cloud") {
    const PointCloud cloud = planar_grid_cloud(41);
    FrameOptions fo;
    fo.k = 2;
    fo.kernel = KernelConfig::Gaussian(0.3);
    const PrincipalFrameField field(cloud, fo);

    const Vec p = vec3(0, 0, 0);
    const SubbundleFrame frame = field.at(p);
    Vec c(2);
    c << 0.6, -0.8;
    const Vec eta0 = 0.3 * (frame.F * c);  // ||eta0|| = 0.3
    const Vec y = sr_exp(field, p, eta0, 1e-3);

    SUBCASE("dual subbundle search") {
        LogOptions opts = quick_opts();
        opts.space = LogSpace::dual_subbundle;
        const LogResult lr = sr_log(field, p, y, opts);
        CHECK((lr.eta_hat - eta0).norm() < 1e-3);
        CHECK(lr.residual < 1e-4);
        CHECK(lr.converged);
        // structural feasibility in the dual subbundle
        const Mat g = frame.cometric();
        CHECK(((Mat::Identity(3, 3) - g) * lr.eta_hat).norm() < 1e-9);
    }
    SUBCASE("full cotangent search") {
        LogOptions opts = quick_opts();
        opts.space = LogSpace::full_cotangent;
        const LogResult lr = sr_log(field, p, y, opts);
        CHECK((lr.eta_hat - eta0).norm() < 2e-3);
        CHECK(lr.residual < 1e-3);
    }
    SUBCASE("warm-started full search matches") {
        LogOptions opts = quick_opts();
        opts.space = LogSpace::full_cotangent;
        opts.warm_start_dual = true;
        opts.full_refine_iterations = 3;
        const LogResult lr = sr_log(field, p, y, opts);
        CHECK((lr.eta_hat - eta0).norm() < 1e-3);
        CHECK(lr.residual < 1e-4);
    }
}

TEST_CASE("winner never loses to its own starting points") {
    const PointCloud cloud = planar_grid_cloud(31);
    FrameOptions fo;
    fo.k = 2;
    fo.kernel = KernelConfig::Gaussian(0.35);
    const PrincipalFrameField field(cloud, fo);

    const Vec p = vec3(-0.2, 0.1, 0.0);
    const Vec y = vec3(0.4, -0.3, 0.0);
    LogOptions opts = quick_opts();
    opts.space = LogSpace::full_cotangent;
    const LogResult lr = sr_log(field, p, y, opts);

    // objective at the chord-projection start, same shooting resolution
    const SubbundleFrame frame = field.at(p);
    const Vec chord_eta = frame.F * (frame.F.transpose() * (y - p));
    IntegrateOptions shoot;
    shoot.step = opts.coarse_step;
    shoot.record_states = false;
    const double chord_objective =
        (integrate(field, p, chord_eta, 1.0, shoot).endpoint() - y).squaredNorm() +
        opts.hamiltonian_weight * hamiltonian(frame, chord_eta);
    CHECK(lr.objective <= chord_objective + 1e-12);
    CHECK(lr.restarts_used == 3);  // perturbation, chord, one random
}

TEST_CASE("distant targets on a curved cloud leave a positive residual") {
    const SSurfaceData data = gen_s_surface_with_truth(1200, 0.01, 3, 5);
    const PointCloud cloud = data.cloud();
    FrameOptions fo;
    fo.k = 2;
    fo.kernel = KernelConfig::Gaussian(0.12);
    const PrincipalFrameField field(cloud, fo);

    // from one end of the S profile to the middle, one bend apart
    Eigen::Index ix = 0, iy = 0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i)
        if (data.t_param[i] < data.t_param[ix]) ix = i;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        // mid-profile, same width band as x
        const double score = std::abs(data.t_param[i]) +
                             std::abs(data.v_param[i] - data.v_param[ix]);
        const double best = std::abs(data.t_param[iy]) +
                            std::abs(data.v_param[iy] - data.v_param[ix]);
        if (score < best) iy = i;
    }
    const Vec x = cloud.point(ix), y = cloud.point(iy);

    LogOptions opts = quick_opts();
    opts.max_iterations = 100;
    opts.random_restarts = 2;
    opts.coarse_step = 0.01;
    const LogResult lr = sr_log(field, x, y, opts);
    CHECK(lr.residual > 1e-3);  // no exact match through the learned geometry

    // the geodesic stays near the data
    const SSurfaceData dense = gen_s_surface_with_truth(4000, 0.0, 3, 6);
    IntegrateOptions io;
    io.step = 1e-2;
    const GeodesicPath path = integrate(field, x, lr.eta_hat, 1.0, io);
    double worst = 0.0;
    for (std::size_t j = 0; j < path.states.size(); j += 5) {
        const double nearest =
            (dense.points.rowwise() - path.states[j].p.transpose())
                .rowwise()
                .norm()
                .minCoeff();
        worst = std::max(worst, nearest);
    }
    CHECK(worst < 0.15);
}

TEST_CASE("sr_distance") {
    SUBCASE("of a point to itself is zero") {
        const PointCloud cloud = planar_grid_cloud(15);
        FrameOptions fo;
        fo.k = 2;
        fo.kernel = KernelConfig::Gaussian(0.45);
        const PrincipalFrameField field(cloud, fo);
        const Vec x = vec3(0.2, 0.0, 0.0);
        CHECK(sr_distance(field, x, x, quick_opts()) < 1e-6);
    }
    SUBCASE("recovers integration time at unit speed on the sphere cloud") {
        const PointCloud cloud(sphere_points(1500, 2, 21));
        FrameOptions fo;
        fo.k = 2;
        fo.kernel = KernelConfig::Gaussian(0.15, 1e-7);
        const PrincipalFrameField field(cloud, fo);

        Vec x = vec3(0, -1, 0);
        const SubbundleFrame frame = field.at(x);
        Vec c(2);
        c << 1.0, 0.0;
        const Vec eta = frame.F * c;  // H = 1/2, unit speed
        const double T = 0.6;
        IntegrateOptions io;
        io.step = 1e-3;
        const Vec y = integrate(field, x, eta, T, io).endpoint();

        LogOptions opts = quick_opts();
        opts.max_iterations = 100;
        const double d = sr_distance(field, x, y, opts);
        CHECK(d == doctest::Approx(T).epsilon(0.02));
    }
    SUBCASE("dominates the chord up to the endpoint miss on flat geometry") {
        const PointCloud cloud = planar_grid_cloud(31);
        FrameOptions fo;
        fo.k = 2;
        fo.kernel = KernelConfig::Gaussian(0.35);
        const PrincipalFrameField field(cloud, fo);
        const Vec x = vec3(-0.3, -0.2, 0.0), y = vec3(0.5, 0.4, 0.0);
        LogOptions opts = quick_opts();
        opts.space = LogSpace::full_cotangent;
        const LogResult lr = sr_log(field, x, y, opts);
        const double d = std::sqrt(2.0 * lr.hamiltonian);
        CHECK(d >= (x - y).norm() - lr.residual - 1e-6);
    }
    SUBCASE("symmetrized option averages both directions") {
        const PointCloud cloud = planar_grid_cloud(21);
        FrameOptions fo;
        fo.k = 2;
        fo.kernel = KernelConfig::Gaussian(0.4);
        const PrincipalFrameField field(cloud, fo);
        const Vec x = vec3(-0.2, 0.0, 0.0), y = vec3(0.3, 0.1, 0.0);
        const double plain = sr_distance(field, x, y, quick_opts());
        const double sym = sr_distance(field, x, y, quick_opts(), true);
        CHECK(sym == doctest::Approx(plain).epsilon(0.05));
    }
}

TEST_CASE("zero iteration budget cannot descend") {
    const PointCloud cloud = planar_grid_cloud(15);
    FrameOptions fo;
    fo.k = 2;
    fo.kernel = KernelConfig::Gaussian(0.45);
    const PrincipalFrameField field(cloud, fo);
    LogOptions opts = quick_opts();
    opts.max_iterations = 0;
    CHECK_THROWS_AS(
        (void)sr_log(field, vec3(0, 0, 0), vec3(0.4, 0.2, 0.0), opts),
        NoDescentError);
}
