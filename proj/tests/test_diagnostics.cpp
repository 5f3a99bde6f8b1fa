#include <doctest.h>

#include <numbers>

#include "abelu/diagnostics.hpp"
#include "property_case.hpp"

using namespace abelu;
constexpr double kPi = std::numbers::pi;

namespace {
Poly z_poly() { return Poly::monomial(1, kDefaultBits); }
Poly c_poly(cplx c) { return Poly::constant(c, kDefaultBits); }
}  // namespace

TEST_CASE("dilate density examples") {
    Arc K(1.0, 0.5);
    std::vector<double> radii{0.5, 0.9, 0.99, 0.999};
    Poly phi = Poly::from_cplx(std::vector<cplx>{1.0, cplx(0, 2), 0.5}, kDefaultBits);
    auto rep = dilate_density_check(phi, radii, K, phi);
    for (std::size_t i = 1; i < rep.errors.size(); ++i) CHECK(rep.errors[i] <= rep.errors[i - 1]);
    // |phi'| <= 2 + 1 on the unit disc
    CHECK(rep.best_error <= 3.0 * (1.0 - 0.999) + 1e-12);
    auto zero = dilate_density_check(Poly(kDefaultBits), radii, K, c_poly(1.0));
    for (double e : zero.errors) CHECK(e == doctest::Approx(1.0));
}

TEST_CASE("growth metrics examples") {
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back(0.02 * i);
    auto c = growth_metrics(c_poly(0.8), grid);
    CHECK(c.hornblower_partial == 0.0);
    auto m = growth_metrics(Poly::monomial(7, kDefaultBits), grid);
    CHECK(m.hornblower_partial == 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(m.M[i] == doctest::Approx(std::pow(grid[i], 7)).epsilon(1e-9));
    CHECK(m.monotone);
    CompactTarget A;
    A.segments.push_back({0.0, 0.0, 1.0});
    auto a = growth_metrics(z_poly(), grid, A);
    REQUIRE(a.M_A[10]);
    CHECK(*a.M_A[10] == doctest::Approx(grid[10]));
}

TEST_CASE("gap witness examples") {
    auto w = gap_witnesses(lacunary(12));
    bool had = false;
    for (const auto& x : w)
        if (x.kind == GapWitness::Kind::Hadamard) {
            had = true;
            CHECK(x.ratio == 2.0);
            CHECK(x.support.size() == 12);
        }
    CHECK(had);
    std::vector<cplx> ones(200, 1.0);
    auto u = gap_witnesses(Poly::from_cplx(ones, kDefaultBits), 0.9, 1.1, 10);
    for (const auto& x : u) {
        CHECK(x.kind != GapWitness::Kind::Hadamard);
        CHECK(x.kind != GapWitness::Kind::HadamardOstrowski);
    }
}

TEST_CASE("spherical derivative and Bloch examples") {
    SectorRegion full;
    CHECK(normality_scan(c_poly(3.0), full).value == 0.0);
    CHECK(normality_scan(z_poly(), full).value == doctest::Approx(1.0));
    CHECK(bloch_norm_estimate(c_poly(3.0)).value == 0.0);
    CHECK(bloch_norm_estimate(z_poly()).value == doctest::Approx(1.0));
    SectorRegion bad{0.5, 1.0, 0.0, kPi};
    CHECK_THROWS(bad.validate());
}

TEST_CASE("lacunary Bloch and normality estimates are stable under refinement") {
    Poly f = lacunary(12);
    double b1 = bloch_norm_estimate(f, {128, 256}).value, b2 = bloch_norm_estimate(f, {256, 512}).value;
    CHECK(std::isfinite(b1));
    CHECK(std::fabs(b2 - b1) <= 0.05 * b2);
    SectorRegion s{0.0, 0.999, 0.0, kPi};
    double n1 = normality_scan(f, s, {128, 256}).value, n2 = normality_scan(f, s, {256, 512}).value;
    CHECK(std::fabs(n2 - n1) <= 0.05 * n2);
}

TEST_CASE("Picard coverage examples") {
    ValueWindow w{0.0, 1.0, 8};
    auto z = picard_coverage(Poly(kDefaultBits), 1.0, 0.2, w, 0.01);
    CHECK(z.covered_fraction == doctest::Approx(1.0 / 64.0));
    // identity map: covered cells are those meeting D(1, 0.1) inside the disc
    ValueWindow wi{1.0, 0.2, 4};
    auto id = picard_coverage(z_poly(), 1.0, 0.1, wi, 0.001);
    CHECK(id.covered_fraction > 0.0);
    CHECK(id.covered_fraction <= 0.5);
    for (auto [i, j] : id.missed) {
        double x0 = 0.8 + 0.1 * i, y0 = -0.2 + 0.1 * j;
        // a missed cell must not lie inside D(1, 0.1) and the disc at its center
        cplx c(x0 + 0.05, y0 + 0.05);
        CHECK_FALSE((std::abs(c - 1.0) < 0.09 && std::abs(c) < 0.99));
    }
}

TEST_CASE("radial cluster examples") {
    std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 0.9};
    auto c = radial_cluster_sample(c_poly(cplx(0.3, 0.1)), 1.0, grid, {}, 0.1);
    for (auto v : c.values) CHECK(v == cplx(0.3, 0.1));
    CHECK(c.tail_oscillation == 0.0);
    auto z = radial_cluster_sample(z_poly(), 1.0, grid, {}, 0.1);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(z.values[i].real() == doctest::Approx(grid[i]));
}

TEST_CASE("two radii examples") {
    std::vector<double> grid{0.0, 0.3, 0.6, 0.9};
    cplx z1 = 1.0, z2 = -1.0;
    CHECK(two_radii_bound_check(Poly(kDefaultBits), z1, z2, 1.0, grid).max_ratio == 0.0);
    double c = 0.4;
    auto r = two_radii_bound_check(c_poly(std::exp(3 * c)), z1, z2, c, grid);
    CHECK(r.max_ratio == doctest::Approx(std::exp(c)));
    CHECK(r.at_r == 0.0);
}

TEST_CASE("partial-sum divergence profile examples") {
    auto pts = circle_grid(64);
    std::vector<long> cps{1};
    auto zero = partial_sum_divergence_profile(Poly(kDefaultBits), pts, cps);
    for (double r : zero.min_ratio) CHECK(r == 0.0);
    std::vector<long> beyond{5};
    CHECK_THROWS(partial_sum_divergence_profile(Poly::monomial(2, kDefaultBits), pts, beyond));
    Poly f = Poly::from_cplx(std::vector<cplx>{0.0, 0.0, 0.0, 1.0}, kDefaultBits);
    std::vector<long> three{3};
    auto p = partial_sum_divergence_profile(f, pts, three);
    for (double r : p.min_ratio) CHECK(r == doctest::Approx(1.0 / 3.0));
    CHECK(p.fraction == 0.0);
}

TEST_CASE("series CSV") {
    Series s{"x", {"r", "value"}, {{0.5, 1.0}, {0.75, 2.0}}};
    auto csv = to_csv(s);
    CHECK(csv.rfind("r,value\n", 0) == 0);
    CHECK(csv.find("0.75,2") != std::string::npos);
}

TEST_CASE("diagnostics invariants") { run_module_properties("diagnostics"); }
