#include <doctest.h>

#include "abelu/capacity.hpp"
#include "property_case.hpp"

using namespace abelu;

TEST_CASE("single point has capacity 0") {
    PointCloud c{{cplx(0.3, 0.2)}, "point"};
    auto e = capacity_estimate(c);
    CHECK(e.value == 0.0);
    CHECK(e.m == 1);
}

TEST_CASE("clouds reject duplicates and emptiness") {
    PointCloud dup{{1.0, 1.0}, "dup"};
    CHECK_THROWS(dup.validate());
    PointCloud empty{{}, "empty"};
    CHECK_THROWS(capacity_estimate(empty));
    PointCloud two{{0.0, 1.0}, "two"};
    CHECK_THROWS(capacity_estimate(two, 1));
}

TEST_CASE("disc oracle: cap = r within 2%") {
    auto e = capacity_estimate(PointCloud::disc(0.0, 0.5, 200.0), 48);
    CHECK(e.m == 48);
    CHECK(std::fabs(e.value - 0.5) <= 0.02 * 0.5);
}

TEST_CASE("segment oracle: cap = L/4 within 5%") {
    auto e = capacity_estimate(PointCloud::segment(cplx(-1.0, 0.0), cplx(1.0, 0.0), 200.0), 48);
    CHECK(std::fabs(e.value - 0.5) <= 0.05 * 0.5);
}

TEST_CASE("small cloud uses all points") {
    PointCloud c{{0.0, 1.0, cplx(0.0, 1.0)}, "triangle"};
    auto e = capacity_estimate(c, 48);
    CHECK(e.m == 3);
    CHECK(e.transfinite_diameter == doctest::Approx(std::cbrt(std::sqrt(2.0))));
}

TEST_CASE("sublevel capacity curve examples") {
    AnnulusRegion K{1.2, 1.5, 20.0};
    std::vector<long> n0{0};
    auto zero = sublevel_capacity_curve(Poly(kDefaultBits), K, 1.0, n0, 48);
    REQUIRE(zero.points.size() == 1);
    CHECK(zero.points[0].cloud_size == zero.grid_points);
    Poly f = Poly::monomial(4, kDefaultBits);
    std::vector<long> ns{4};
    auto mono = sublevel_capacity_curve(f, K, 1.0, ns, 48);
    REQUIRE(mono.points.size() == 1);
    CHECK(mono.points[0].cloud_size == 0);
    CHECK(mono.points[0].estimate.value == 0.0);
    AnnulusRegion bad{0.9, 1.5, 20.0};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("sublevel curve of a constant is flat") {
    AnnulusRegion K{1.2, 1.5, 20.0};
    Poly f = Poly::from_cplx(std::vector<cplx>{0.5, 0.0, 0.0, 0.0, 0.0}, kDefaultBits);
    std::vector<long> ns{0};
    auto c = sublevel_capacity_curve(f, K, 1.0, ns, 48);
    REQUIRE(c.points.size() == 1);
    CHECK(c.points[0].estimate.value == doctest::Approx(capacity_estimate(PointCloud::annulus(1.2, 1.5, 20.0), 48).value));
}

TEST_CASE("Spearman correlation") {
    std::vector<double> x{1, 2, 3, 4}, up{1, 5, 7, 9}, down{4, 3, 2, 1}, ties{1, 1, 2, 2};
    CHECK(spearman(x, up) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));
    CHECK(spearman(x, ties) == doctest::Approx(0.894427191));
}

TEST_CASE("capacity invariants") { run_module_properties("capacity"); }
