#include <doctest.h>

#include "subflow/geometry.hpp"
#include "subflow/rng.hpp"

#include "helpers.hpp"

using namespace subflow;
using namespace subflow::testing;

TEST_CASE("euclidean exp/log/transport are affine") {
    const Geometry geom = Geometry::Euclidean(2);
    CHECK((exp_map(geom, vec2(1, 2), vec2(0, 0)) - vec2(1, 2)).norm() == 0.0);
    CHECK((log_map(geom, vec2(1, 2), vec2(4, -1)) - vec2(3, -3)).norm() == 0.0);
    CHECK((parallel_transport(geom, vec2(0, 0), vec2(5, 5), vec2(1, 2)) -
           vec2(1, 2))
              .norm() == 0.0);
    CHECK(metric_matrix(geom, vec2(0, 0)).isIdentity(0.0));
}

TEST_CASE("sphere exp closed forms") {
    const Geometry geom = Geometry::Sphere(2);
    const Vec pole = vec3(0, 0, 1);

    SUBCASE("quarter great circle") {
        const Vec q = exp_map(geom, pole, vec3(M_PI / 2.0, 0, 0));
        CHECK((q - vec3(1, 0, 0)).norm() < 1e-12);
    }
    SUBCASE("zero vector returns the point") {
        CHECK((exp_map(geom, pole, vec3(0, 0, 0)) - pole).norm() == 0.0);
    }
    SUBCASE("full-period tangent returns to the point") {
        const Vec v = vec3(2.0 * M_PI / std::sqrt(2.0), 2.0 * M_PI / std::sqrt(2.0), 0);
        CHECK((exp_map(geom, pole, v) - pole).norm() < 1e-8);
    }
}

TEST_CASE("sphere log closed forms and cut locus") {
    const Geometry geom = Geometry::Sphere(2);
    const Vec pole = vec3(0, 0, 1);
    CHECK(log_map(geom, pole, pole).norm() == 0.0);
    CHECK((log_map(geom, pole, vec3(1, 0, 0)) - vec3(M_PI / 2.0, 0, 0)).norm() <
          1e-12);
    CHECK_THROWS_AS((void)log_map(geom, pole, vec3(0, 0, -1)), CutLocusError);
}

TEST_CASE("sphere exp/log roundtrip away from the cut locus") {
    const Geometry geom = Geometry::Sphere(2);
    Rng rng(7);
    const Mat pts = sphere_points(200, 2, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec p = pts.row(2 * trial).transpose();
        const Vec q = pts.row(2 * trial + 1).transpose();
        if (geodesic_distance(geom, p, q) >= M_PI - 0.1) continue;
        const Vec v = log_map(geom, p, q);
        CHECK((exp_map(geom, p, v) - q).norm() < 1e-8);
        CHECK(v.norm() ==
              doctest::Approx(std::acos(std::clamp(p.dot(q), -1.0, 1.0)))
                  .epsilon(1e-9));
        CHECK(std::abs(v.dot(p)) < 1e-9);  // tangent at p
    }
}

TEST_CASE("sphere parallel transport") {
    const Geometry geom = Geometry::Sphere(2);
    const Vec x = vec3(0, 0, 1);
    const Vec y = vec3(std::sin(0.8), 0, std::cos(0.8));

    SUBCASE("geodesics are auto-parallel") {
        const Vec v = log_map(geom, x, y);
        const Vec moved = parallel_transport(geom, x, y, v);
        const Vec back = log_map(geom, y, x);
        // terminal velocity points away from x with the same magnitude
        CHECK((moved + back).norm() < 1e-10);
    }
    SUBCASE("vectors orthogonal to the great-circle plane are unchanged") {
        const Vec v = vec3(0, 1, 0);
        CHECK((parallel_transport(geom, x, y, v) - v).norm() < 1e-12);
    }
    SUBCASE("transport is an isometry on random tangent pairs") {
        Rng rng(11);
        const Mat pts = sphere_points(60, 2, 5);
        for (int t = 0; t < 30; ++t) {
            const Vec a = pts.row(2 * t).transpose();
            const Vec b = pts.row(2 * t + 1).transpose();
            if (a.dot(b) <= -1.0 + 1e-6) continue;
            Vec v = vec3(rng.normal(), rng.normal(), rng.normal());
            Vec w = vec3(rng.normal(), rng.normal(), rng.normal());
            v -= v.dot(a) * a;
            w -= w.dot(a) * a;
            const Vec tv = parallel_transport(geom, a, b, v);
            const Vec tw = parallel_transport(geom, a, b, w);
            CHECK(std::abs(tv.dot(tw) - v.dot(w)) < 1e-9);
            CHECK(std::abs(tv.norm() - v.norm()) < 1e-9);
        }
    }
}

TEST_CASE("spherical test chart metric") {
    CHECK((SphericalChart::metric(M_PI / 2.0) - Mat::Identity(2, 2)).norm() <
          1e-12);
    Mat expected(2, 2);
    expected << 1.0, 0.0, 0.0, 0.5;
    CHECK((SphericalChart::metric(M_PI / 4.0) - expected).norm() < 1e-12);
    CHECK_THROWS_AS((void)SphericalChart::metric(0.0), ChartDomainError);
    CHECK_THROWS_AS((void)SphericalChart::metric(M_PI), ChartDomainError);

    // the chart basis pulls the extrinsic metric back to diag(1, sin^2 theta)
    const double theta = 1.1, phi = 0.4;
    const Mat b = SphericalChart::basis(theta, phi);
    CHECK((b.transpose() * b - SphericalChart::metric(theta, phi)).norm() < 1e-12);
}

TEST_CASE("dimension mismatches are rejected") {
    const Geometry geom = Geometry::Sphere(2);
    CHECK_THROWS_AS((void)exp_map(geom, vec2(1, 0), vec2(0, 0)),
                    DimensionMismatchError);
    CHECK_THROWS_AS((void)log_map(Geometry::Euclidean(2), vec2(0, 0), vec3(0, 0, 1)),
                    DimensionMismatchError);
}
