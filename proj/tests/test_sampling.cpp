#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "featsize/sampling.hpp"

using namespace featsize;

TEST_CASE("circle sample: density, residuals, and verification") {
    PolySystem circle = parse_system("x1^2 + x2^2 - 1");
    Box box{{-2.0, -2.0}, {2.0, 2.0}};
    double eps = 0.1, delta = 1e-6;

    PointSample s = sample_variety(circle, box, eps, delta);
    INFO("points " << s.points.size());
    // arclength 2*pi at covering radius 0.1 needs at least ceil(2*pi/0.1) points
    CHECK(s.points.size() >= 63);
    for (const auto& p : s.points) {
        double r = std::abs(p[0] * p[0] + p[1] * p[1] - 1.0);
        CHECK(r < 1e-5);
    }

    SampleCheck rep = verify_sample(circle, s, 400);
    CHECK(rep.max_residual_distance <= delta);
    CHECK(rep.empirical_covering_radius <= eps);
    CHECK(rep.pass);
}

TEST_CASE("covering radius shrinks under refinement and grows when points are dropped") {
    PolySystem circle = parse_system("x1^2 + x2^2 - 1");
    Box box{{-2.0, -2.0}, {2.0, 2.0}};

    PointSample coarse = sample_variety(circle, box, 0.2, 1e-6);
    PointSample fine = sample_variety(circle, box, 0.1, 1e-6);
    SampleCheck rc = verify_sample(circle, coarse, 400);
    SampleCheck rf = verify_sample(circle, fine, 400);
    CHECK(rf.empirical_covering_radius <= rc.empirical_covering_radius + 1e-12);

    PointSample holed = fine;
    REQUIRE(holed.points.size() > 4);
    holed.points.erase(holed.points.begin(), holed.points.begin() + 3);
    SampleCheck rh = verify_sample(circle, holed, 400);
    CHECK(rh.empirical_covering_radius >= rf.empirical_covering_radius);
}

TEST_CASE("sphere sample covers the surface") {
    PolySystem sphere = parse_system("x1^2 + x2^2 + x3^2 - 1");
    Box box{{-1.5, -1.5, -1.5}, {1.5, 1.5, 1.5}};
    PointSample s = sample_variety(sphere, box, 0.4, 1e-6);
    INFO("points " << s.points.size());
    CHECK(s.points.size() >= 100);
    for (const auto& p : s.points)
        CHECK(std::abs(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0) < 1e-5);
    SampleCheck rep = verify_sample(sphere, s, 300);
    CHECK(rep.pass);
}

TEST_CASE("space curve sample via plane slices") {
    // unit circle embedded in the z = 0 plane of R^3: sphere cut by a plane
    // through the origin, expressed with polynomial slices on both equations
    PolySystem curve = parse_system("x1^2 + x2^2 + x3^2 - 1\nx3");
    Box box{{-1.5, -1.5, -0.5}, {1.5, 1.5, 0.5}};
    PointSample s = sample_variety(curve, box, 0.2, 1e-8);
    INFO("points " << s.points.size());
    CHECK(s.points.size() >= 30);
    for (const auto& p : s.points) {
        CHECK(std::abs(p[0] * p[0] + p[1] * p[1] - 1.0) < 1e-6);
        CHECK(std::abs(p[2]) < 1e-6);
    }
}

TEST_CASE("newton projection lands on the variety") {
    PolySystem circle = parse_system("x1^2 + x2^2 - 1");
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        RealPoint p = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
        if (std::hypot(p[0], p[1]) < 0.3) continue;  // near the center the projection is ill-posed
        RealPoint q = newton_project(circle, p);
        CHECK(std::abs(q[0] * q[0] + q[1] * q[1] - 1.0) < 1e-12);
    }
}

TEST_CASE("csv round trip preserves contract and points") {
    PointSample s;
    s.delta = 1e-6;
    s.epsilon = 0.25;
    s.points = {{1.0, 2.0}, {-0.5, 0.125}, {3.25, -4.75}};
    std::stringstream ss;
    write_points_csv(ss, s);
    std::string text = ss.str();
    CHECK(text.find("# delta=1e-06, epsilon=0.25") == 0);

    PointSample r = read_points_csv(ss);
    CHECK(r.delta == s.delta);
    CHECK(r.epsilon == s.epsilon);
    REQUIRE(r.points.size() == 3);
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 2; ++a) CHECK(r.points[i][a] == s.points[i][a]);
}

TEST_CASE("nearest-neighbor grid agrees with brute force") {
    Rng rng(23);
    std::vector<RealPoint> cloud;
    for (int i = 0; i < 200; ++i) cloud.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    PointGrid grid(cloud, 0.5);
    for (int t = 0; t < 100; ++t) {
        RealPoint q = {rng.uniform(-4, 4), rng.uniform(-4, 4)};
        double dg = 0;
        grid.nearest(q, &dg);
        double db = std::numeric_limits<double>::infinity();
        for (const auto& p : cloud) db = std::min(db, std::hypot(p[0] - q[0], p[1] - q[1]));
        CHECK(dg == Catch::Approx(db).margin(1e-12));
    }
}

TEST_CASE("degenerate requests are rejected") {
    PolySystem circle = parse_system("x1^2 + x2^2 - 1");
    Box box{{-2.0, -2.0}, {2.0, 2.0}};
    CHECK_THROWS_AS(sample_variety(circle, box, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_variety(circle, box, 1e-7, 1e-6), std::invalid_argument);
    Box box3{{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(sample_variety(circle, box3, 0.1, 1e-6), std::invalid_argument);

    // far-away box misses the variety entirely
    Box far{{5.0, 5.0}, {6.0, 6.0}};
    PointSample s = sample_variety(circle, far, 0.1, 1e-6);
    CHECK(s.points.empty());
}
