#include <doctest.h>

#include <numbers>

#include "abelu/geometry.hpp"
#include "abelu/numerics.hpp"
#include "property_case.hpp"

using namespace abelu;
constexpr double kPi = std::numbers::pi;

TEST_CASE("arc validation") {
    CHECK_THROWS_AS(Arc(0.0, kPi), GeometryError);
    CHECK_THROWS_AS(Arc(0.0, 0.0), GeometryError);
    Arc a(-kPi / 2, 0.1);
    CHECK(a.center_angle == doctest::Approx(3 * kPi / 2));
    CHECK(a.contains_angle(3 * kPi / 2 + 0.05));
    CHECK_FALSE(a.contains_angle(0.0));
}

TEST_CASE("sample examples") {
    CompactTarget K;
    K.arcs.emplace_back(0.3, kPi / 4);
    auto g = sample(K, 100.0 / kPi);
    CHECK(g.points.size() >= 50);
    for (auto z : g.points) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);

    CompactTarget D;
    D.disc_r = 0.0;
    auto h = sample(D, 10.0);
    REQUIRE(h.points.size() == 1);
    CHECK(h.points[0] == cplx(0.0, 0.0));
}

TEST_CASE("disc plus arc tags partition the grid") {
    CompactTarget K;
    K.disc_r = 0.5;
    K.arcs.emplace_back(kPi, 0.5);
    auto pieces = K.pieces();
    REQUIRE(pieces.size() == 2);
    auto g = sample(K, 50.0);
    std::size_t on_disc = 0, on_arc = 0;
    for (std::size_t i = 0; i < g.points.size(); ++i) {
        bool d = distance_to_piece(K, pieces[0], g.points[i]) <= 1e-12;
        bool a = distance_to_piece(K, pieces[1], g.points[i]) <= 1e-12;
        CHECK(d != a);
        CHECK((d ? 0u : 1u) == g.piece_tags[i]);
        on_disc += d;
        on_arc += a;
    }
    CHECK(on_disc > 0);
    CHECK(on_arc > 0);
}

TEST_CASE("segments never sample the circle endpoint") {
    CompactTarget K;
    K.segments.push_back({0.0, 0.0, 1.0});
    for (auto z : sample(K, 200.0).points) CHECK(std::abs(z) < 1.0);
}

TEST_CASE("arc measure examples") {
    std::vector<Arc> one{Arc(1.0, kPi / 4)};
    CHECK(arc_measure(one) == doctest::Approx(kPi / 2));
    std::vector<Arc> two{Arc(0.0, kPi / 6), Arc(kPi, kPi / 3)};
    CHECK(arc_measure(two) == doctest::Approx(kPi));
    std::vector<Arc> overlap{Arc(0.0, 0.5), Arc(0.8, 0.5)};
    CHECK_THROWS_AS(arc_measure(overlap), GeometryError);
}

TEST_CASE("Poisson kernel examples") {
    for (double t : {0.0, 1.0, 4.0}) CHECK(poisson_kernel(0.0, std::polar(1.0, t)) == doctest::Approx(1.0));
    double s = 0.6;
    cplx zeta = std::polar(1.0, 2.2);
    CHECK(poisson_kernel(s * zeta, zeta) == doctest::Approx((1 + s) / (1 - s)));
    CHECK_THROWS(poisson_kernel(cplx(1.0, 0.0), zeta));
}

TEST_CASE("Poisson kernel against a high-precision re-evaluation") {
    props::Rng g(5);
    for (int t = 0; t < 20; ++t) {
        cplx z = props::in_disc(g, 0.95), zeta = props::unimodular(g);
        const long b = 4 * kDefaultBits;
        CNum Z(z, b), W(zeta, b);
        Real num = Real(1.0, b) - norm(Z);
        Real den = norm(W - Z);
        double oracle = (num / den).to_double();
        CHECK(poisson_kernel(z, zeta) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("harmonic majorant examples") {
    cplx z1 = std::polar(1.0, 0.4), z2 = std::polar(1.0, 2.9);
    CHECK(harmonic_majorant(0.0, z1, z2, 1.5) == doctest::Approx(3.0));
    for (double s : {0.1, 0.5, 0.9, 0.99}) CHECK(harmonic_majorant(s * z1, z1, z2, 1.5) >= 1.5 / (1 - s));
    cplx z(0.2, -0.3);
    CHECK(harmonic_majorant(z, z1, z2, 0.7) == doctest::Approx(harmonic_majorant(z, z2, z1, 0.7)));
    CHECK_THROWS(harmonic_majorant(z, z1, z1, 1.0));
}

TEST_CASE("Stolz angle examples") {
    StolzAngle S(cplx(1.0, 0.0), 1.5);
    CHECK(stolz_contains(S, 0.0));
    CHECK(stolz_contains(S, cplx(0.999, 0.0)));
    // boundary: |-0.5 - 1| = 3 (1 - 0.5)
    CHECK_FALSE(stolz_contains(StolzAngle(cplx(1.0, 0.0), 3.0), cplx(-0.5, 0.0)));
    CHECK_FALSE(stolz_contains(S, cplx(1.0, 0.0)));
    CHECK_THROWS(StolzAngle(cplx(1.0, 0.0), 1.0));
}

TEST_CASE("target JSON round trip") {
    CompactTarget K;
    K.disc_r = 0.4;
    K.arcs.emplace_back(2.0, 0.3);
    K.segments.push_back({4.0, 0.6, 1.0});
    auto L = target_from_json(target_to_json(K));
    CHECK(L.disc_r == K.disc_r);
    CHECK(L.arcs[0].center_angle == K.arcs[0].center_angle);
    CHECK(L.segments[0].from_r == 0.6);
}

TEST_CASE("geometry invariants") { run_module_properties("geometry"); }
