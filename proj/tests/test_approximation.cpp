#include <doctest.h>

#include <numbers>

#include "abelu/approximation.hpp"
#include "property_case.hpp"

using namespace abelu;
constexpr double kPi = std::numbers::pi;

TEST_CASE("polynomial target on one arc is reproduced") {
    Poly q = Poly::from_cplx(std::vector<cplx>{cplx(0.5, 0), cplx(0, -1), cplx(2, 0.25), cplx(-1, 0)}, kDefaultBits);
    CompactTarget K;
    K.arcs.emplace_back(1.0, 0.7);
    std::vector<PieceTarget> t{PieceTarget::polynomial(q)};
    auto res = approximate(K, t, 1e-6, 64);
    CHECK_FALSE(res.failed);
    CHECK(res.certificate.certified_sup_error <= 1e-6);
    CHECK(res.certificate.degree <= q.degree());
}

TEST_CASE("constant on a disc gives degree 0 and zero error") {
    CompactTarget K;
    K.disc_r = 0.5;
    std::vector<PieceTarget> t{PieceTarget::constant(7.0)};
    auto res = approximate(K, t, 1e-6, 64);
    CHECK_FALSE(res.failed);
    CHECK(res.certificate.degree == 0);
    CHECK(res.certificate.certified_sup_error == 0.0);
}

TEST_CASE("disc plus opposite arc, piecewise constant target at tol 1e-2") {
    CompactTarget K;
    K.disc_r = 0.5;
    K.arcs.emplace_back(kPi, 0.5);
    std::vector<PieceTarget> t{PieceTarget::constant(0.0), PieceTarget::constant(1.0)};
    auto res = approximate(K, t, 1e-2, 512);
    REQUIRE_FALSE(res.failed);
    CHECK(res.certificate.certified_sup_error <= 1e-2);
    CHECK(res.certificate.margin_factor > 1.0);
    CHECK(res.certificate.certified_sup_error == doctest::Approx(res.certificate.raw_sup_error * res.certificate.margin_factor));
    auto dense = certify(K, t, res.poly, 10 * res.certificate.validation_points / 2);
    CHECK(dense.raw_sup_error <= res.certificate.certified_sup_error);
}

TEST_CASE("approximate rejects bad input") {
    CompactTarget K;
    K.disc_r = 0.5;
    std::vector<PieceTarget> none;
    CHECK_THROWS(approximate(K, none, 1e-3, 16));
    std::vector<PieceTarget> one{PieceTarget::constant(1.0)};
    CHECK_THROWS(approximate(K, one, 0.0, 16));
    std::vector<PieceTarget> mod{PieceTarget::modulated(3, Poly::constant(1.0, kDefaultBits), Poly(kDefaultBits))};
    CHECK_THROWS(approximate(K, mod, 1e-3, 16));
}

TEST_CASE("max degree exhaustion returns a flagged best effort") {
    CompactTarget K;
    K.arcs.emplace_back(0.0, 1.0);
    K.arcs.emplace_back(kPi, 1.0);
    std::vector<PieceTarget> t{PieceTarget::constant(0.0), PieceTarget::constant(1.0)};
    auto res = approximate(K, t, 1e-12, 8);
    CHECK(res.failed);
    CHECK_FALSE(res.message.empty());
    CHECK(res.certificate.certified_sup_error > 1e-12);
}

TEST_CASE("tail index examples") {
    CHECK(tail_index(SequenceSpec::zero(), 0.5, 0.25) == 0);
    // gamma = 1, r = 1/2: the double tail is 2^(2-n)
    auto one = SequenceSpec::power_law(1.0, 0.0, 0);
    CHECK(double_tail(one, 0.5, 4, 1e-9) == doctest::Approx(0.25));
    CHECK(tail_index(one, 0.5, 0.25) == 4);
    long n = tail_index(SequenceSpec::k4(), 0.9, std::ldexp(1.0, -10));
    long double s = 0.0L, rk = std::pow(0.9L, static_cast<long double>(n));
    for (long k = n; k < n + 20000; ++k, rk *= 0.9L) s += (k - n + 1) * std::pow(static_cast<long double>(k), 4.0L) * rk;
    CHECK(s <= std::ldexp(1.0L, -10));
    // one step earlier the inequality fails, so n is the smallest tested index
    CHECK(double_tail(SequenceSpec::k4(), 0.9, n - 1, 1e-9) > std::ldexp(1.0, -10));
}

TEST_CASE("sequence specs") {
    CHECK(SequenceSpec::inverse_index()(0) == doctest::Approx(1.0));
    CHECK(SequenceSpec::inverse_index()(9) == doctest::Approx(0.1));
    CHECK(SequenceSpec::two_k2()(3) == doctest::Approx(18.0));
    CHECK(sequence_from_json(sequence_to_json(SequenceSpec::k4()))(2) == doctest::Approx(16.0));
    CHECK_THROWS(sequence_from_json({{"kind", "nope"}}));
    // upper() never falls below the exact term, and stays within a few ulps of it
    auto g = SequenceSpec::inverse_index();
    for (long k = 1; k < 2000; ++k) {
        Real exact = Real(1.0, kDefaultBits) / Real(static_cast<double>(k + 1), kDefaultBits);
        Real up = g.upper(k, kDefaultBits);
        CHECK(up >= exact);
        CHECK(up - exact <= ldexp(exact, 8 - kDefaultBits));
    }
    CHECK(SequenceSpec::k4().upper(3, kDefaultBits) >= Real(81.0, kDefaultBits));
}

TEST_CASE("uniform dilation radius examples") {
    Arc K(0.5, 0.4);
    auto c = uniform_dilation_radius([](cplx) { return cplx(3.0, 0.0); }, K, 0.1, 0.2);
    CHECK(c.v == doctest::Approx(0.6));
    auto lin = uniform_dilation_radius([](cplx z) { return z; }, K, 0.01, 0.0, 1);
    CHECK(lin.v >= 0.99);
    CHECK(lin.v < 1.0);
}

TEST_CASE("dilation radius re-verified on a denser grid") {
    props::Rng g(13);
    Poly p = props::random_poly(g, 20);
    Arc K(2.0, 0.6);
    auto e = [&](cplx z) { return eval(p, z); };
    auto res = uniform_dilation_radius(e, K, 0.05, 0.5, 20);
    const std::size_t n = 10 * res.grid_points;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cplx z = std::polar(1.0, K.center_angle - K.half_width + 2 * K.half_width * static_cast<double>(i) / static_cast<double>(n - 1));
        worst = std::max(worst, std::abs(e(res.v * z) - e(z)));
    }
    CHECK(worst <= res.certified);
    CHECK(res.certified <= 0.05);
}

TEST_CASE("approximation invariants") { run_module_properties("approximation"); }
