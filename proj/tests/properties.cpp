#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "abelu/approximation.hpp"
#include "abelu/capacity.hpp"
#include "abelu/constructors.hpp"
#include "abelu/diagnostics.hpp"
#include "abelu/geometry.hpp"
#include "abelu/runner.hpp"

namespace abelu::props {

double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

long integer(Rng& g, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(g); }

cplx unimodular(Rng& g) { return std::polar(1.0, uniform(g, 0.0, 2.0 * std::numbers::pi)); }

cplx in_disc(Rng& g, double radius) { return std::polar(radius * std::sqrt(uniform(g, 0.0, 1.0)), uniform(g, 0.0, 2.0 * std::numbers::pi)); }

Poly random_poly(Rng& g, long degree, long bits, double scale) {
    std::vector<cplx> c(static_cast<std::size_t>(degree + 1));
    for (auto& x : c) x = {scale * uniform(g, -1.0, 1.0), scale * uniform(g, -1.0, 1.0)};
    if (std::abs(c.back()) < 1e-3) c.back() = scale;
    return Poly::from_cplx(c, bits);
}

Poly dyadic_poly(Rng& g, long degree, long bits) {
    std::vector<cplx> c(static_cast<std::size_t>(degree + 1));
    for (auto& x : c) x = {std::ldexp(static_cast<double>(integer(g, -1023, 1023)), -10), std::ldexp(static_cast<double>(integer(g, -1023, 1023)), -10)};
    if (c.back() == cplx(0.0, 0.0)) c.back() = 1.0;
    return Poly::from_cplx(c, bits);
}

namespace {

std::string fail(const std::string& what, double got, double limit) {
    std::ostringstream os;
    os << what << ": got " << got << ", limit " << limit;
    return os.str();
}

bool same_coeffs(const Poly& a, const Poly& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(a[k] == b[k])) return false;
    return true;
}

// ---------------------------------------------------------------- numerics

std::string dilate_composition(Rng& g, int) {
    // dyadic r, s and coefficients keep every product exact at 256 bits
    Poly p = dyadic_poly(g, integer(g, 0, 16));
    long i = integer(g, 1, 64), j = integer(g, 1, 64);
    Real r(std::ldexp(static_cast<double>(i), -6), 256), s(std::ldexp(static_cast<double>(j), -6), 256);
    if (!same_coeffs(dilate(dilate(p, r), s), dilate(p, r * s))) return "dilate(dilate(p, r), s) != dilate(p, rs)";
    return {};
}

std::string abel_residual(Rng& g, int) {
    Poly p = random_poly(g, integer(g, 0, 500));
    Real r(uniform(g, 0.0, 0.999), kDefaultBits);
    CNum zeta = CNum::unit(uniform(g, 0.0, 2.0 * std::numbers::pi), kDefaultBits);
    double res = abel_identity_residual(p, r, zeta).to_double();
    double lim = std::ldexp(1.0, -static_cast<int>(kDefaultBits) + 16);
    return res <= lim ? std::string{} : fail("abel residual", res, lim);
}

std::string partial_sum_differences(Rng& g, int) {
    Poly p = dyadic_poly(g, integer(g, 1, 12));
    cplx z(std::ldexp(static_cast<double>(integer(g, -16, 16)), -4), std::ldexp(static_cast<double>(integer(g, -16, 16)), -4));
    CNum zz(z, kDefaultBits);
    auto tr = partial_sums_at(p, zz);
    CNum zk(cplx(1.0, 0.0), kDefaultBits);
    if (!(tr.values[0] == p[0])) return "values[0] != a_0";
    for (std::size_t k = 1; k < p.size(); ++k) {
        zk *= zz;
        if (!(tr.values[k] - tr.values[k - 1] == p[k] * zk)) return "values[k] - values[k-1] != a_k z^k at k = " + std::to_string(k);
    }
    if (!(tr.values.back() == eval(p, zz))) return "values[N] != eval";
    return {};
}

std::string cauchy_bounds(Rng& g, int) {
    Poly p = random_poly(g, integer(g, 0, 12), kDefaultBits, uniform(g, 0.1, 10.0));
    double R = uniform(g, 0.2, 2.0);
    auto cb = cauchy_coefficient_bounds(p, R);
    for (std::size_t k = 0; k < p.size(); ++k)
        if (abs(p[k]) > cb.bounds[k]) return fail("|a_k| above its Cauchy bound", abs(p[k]).to_double(), cb.bounds[k].to_double());
    return cb.certified ? std::string{} : "certified flag not set";
}

std::string poly_round_trip(Rng& g, int) {
    long bits = integer(g, 64, 600);
    Poly p = random_poly(g, integer(g, 0, 40), bits);
    Poly q = poly_from_json(nlohmann::json::parse(poly_to_json(p).dump()));
    return same_coeffs(p, q) && q.bits() == p.bits() ? std::string{} : "JSON round trip changed coefficients";
}

// ---------------------------------------------------------------- geometry

std::string poisson_normalization(Rng& g, int) {
    cplx z = in_disc(g, 0.9);
    const int n = 1 << 14;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += poisson_kernel(z, std::polar(1.0, 2.0 * std::numbers::pi * k / n));
    double mean = acc / n;
    return std::fabs(mean - 1.0) <= 1e-6 ? std::string{} : fail("Poisson mean", mean, 1.0);
}

std::string stolz_rotation(Rng& g, int) {
    double alpha = uniform(g, 1.05, 4.0);
    cplx v = unimodular(g);
    cplx z = in_disc(g, 1.0);
    cplx w = std::polar(1.0, uniform(g, 0.0, 2.0 * std::numbers::pi));
    double margin = std::abs(z - v) - alpha * (1.0 - std::abs(z));
    if (std::fabs(margin) < 1e-9) return {};
    bool a = stolz_contains(StolzAngle(v, alpha), z);
    bool b = stolz_contains(StolzAngle(v * w, alpha), z * w);
    return a == b ? std::string{} : "Stolz membership changed under rotation";
}

std::string sample_tags(Rng& g, int) {
    CompactTarget K;
    if (integer(g, 0, 1)) K.disc_r = uniform(g, 0.0, 0.6);
    double c = uniform(g, 0.0, 2.0 * std::numbers::pi);
    K.arcs.emplace_back(c, uniform(g, 0.05, 1.0));
    if (integer(g, 0, 1)) K.arcs.emplace_back(c + std::numbers::pi, uniform(g, 0.05, 1.0));
    if (integer(g, 0, 1)) K.segments.push_back({c + std::numbers::pi / 2, 0.7, 1.0});
    try {
        K.validate();
    } catch (const GeometryError&) {
        return {};
    }
    auto pieces = K.pieces();
    auto grid = sample(K, uniform(g, 5.0, 60.0));
    if (grid.points.size() != grid.piece_tags.size()) return "tag count mismatch";
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        std::size_t on = 0;
        for (std::size_t p = 0; p < pieces.size(); ++p)
            if (distance_to_piece(K, pieces[p], grid.points[i]) <= 1e-12) {
                ++on;
                if (p != grid.piece_tags[i]) return "point lies on a piece other than its tag";
            }
        if (on != 1) return "point lies on " + std::to_string(on) + " pieces";
    }
    return {};
}

// ---------------------------------------------------------------- approximation

std::string tail_index_resum(Rng& g, int) {
    SequenceSpec w;
    switch (integer(g, 0, 2)) {
        case 0: w = SequenceSpec::k4(); break;
        case 1: w = SequenceSpec::two_k2(); break;
        default: w = SequenceSpec::power_law(uniform(g, 0.1, 3.0), static_cast<double>(integer(g, -2, 5)), integer(g, 1, 4));
    }
    double r = uniform(g, 0.2, 0.95), eps = std::pow(10.0, uniform(g, -9.0, -1.0));
    long n = tail_index(w, r, eps);
    long double s = 0.0L, rk = std::pow(static_cast<long double>(r), static_cast<long double>(n));
    for (long k = n; k < n + 40000; ++k) {
        s += static_cast<long double>(k - n + 1) * static_cast<long double>(w(k)) * rk;
        rk *= r;
    }
    return s <= static_cast<long double>(eps) ? std::string{} : fail("double tail at returned n", static_cast<double>(s), eps);
}

std::string polynomial_targets(Rng& g, int) {
    long d = integer(g, 0, 6);
    Poly q = random_poly(g, d);
    CompactTarget K;
    K.arcs.emplace_back(uniform(g, 0.0, 6.0), uniform(g, 0.1, 1.2));
    std::vector<PieceTarget> t{PieceTarget::polynomial(q)};
    auto res = approximate(K, t, 1e-8, 64);
    if (res.failed) return "failed on a polynomial target: " + res.message;
    if (res.certificate.certified_sup_error > 1e-8) return fail("certified error", res.certificate.certified_sup_error, 1e-8);
    return res.certificate.degree <= d + 16 ? std::string{} : fail("degree", static_cast<double>(res.certificate.degree), static_cast<double>(d + 16));
}

std::string tol_monotone(Rng& g, int) {
    CompactTarget K;
    double c = uniform(g, 0.0, 6.0);
    K.arcs.emplace_back(c, 0.3);
    K.arcs.emplace_back(c + std::numbers::pi, 0.3);
    std::vector<PieceTarget> t{PieceTarget::constant(0.0), PieceTarget::constant(1.0)};
    double prev = std::numeric_limits<double>::infinity();
    for (double tol : {1e-2, 1e-3, 1e-4}) {
        auto res = approximate(K, t, tol, 256);
        if (res.certificate.certified_sup_error > prev) return fail("certified error grew as tol shrank", res.certificate.certified_sup_error, prev);
        prev = res.certificate.certified_sup_error;
    }
    return {};
}

// ---------------------------------------------------------------- constructors

struct FloorArtifact {
    ConstructionResult res;
    FloorArtifact() {
        TargetEnrollment e{{Poly::constant(0.0, kDefaultBits), Poly::constant(1.0, kDefaultBits)},
                           {Arc(0.0, 0.05)},
                           {{0, 0}, {1, 0}},
                           {{0, 0}, {0, 0}, {1, 0}}};
        res = construct_coefficient_floor({SequenceSpec::inverse_index()}, e, StagePolicy::from_rho(3, {0.02, 0.05, 0.1, 0.5, 0.8}));
    }
};

const FloorArtifact& floor_artifact() {
    static const FloorArtifact a;
    return a;
}

std::string block_constancy(Rng& g, int) {
    const auto& res = floor_artifact().res;
    const auto& st = res.report.stages;
    // gaps between consecutive blocks: S_N is constant for block_hi(n) <= N < block_lo(n+1)
    std::vector<std::pair<long, long>> gaps;
    for (std::size_t n = 0; n + 1 < st.size(); ++n)
        if (st[n + 1].block_lo - 1 > st[n].block_hi) gaps.emplace_back(st[n].block_hi, st[n + 1].block_lo - 1);
    gaps.emplace_back(0, st.front().block_lo - 1);
    auto [lo, hi] = gaps[static_cast<std::size_t>(integer(g, 0, static_cast<long>(gaps.size()) - 1))];
    if (hi <= lo) return {};
    CNum z(unimodular(g) * uniform(g, 0.5, 1.0), kDefaultBits);
    auto tr = partial_sums_at(res.f, z);
    long N = integer(g, lo, hi);
    if (!(tr.values[static_cast<std::size_t>(N)] == tr.values[static_cast<std::size_t>(lo)])) return "partial sums change inside a gap";
    return {};
}

std::string lem1_random(Rng& g, int) {
    long l = integer(g, 1, 20);
    double R = uniform(g, 0.1, 10.0);
    std::vector<cplx> w, z;
    for (long m = 0; m < l; ++m) {
        // place some |w_m| near multiples of 2R to stress the candidate exclusion
        double mod = integer(g, 0, 1) ? 2.0 * R * static_cast<double>(integer(g, 0, l)) + uniform(g, -R, R) : uniform(g, 0.0, 3.0 * l * R);
        w.push_back(std::polar(mod, uniform(g, 0.0, 6.3)));
        z.push_back(unimodular(g));
    }
    cplx b = lem1_shift(w, z, R);
    if (std::abs(b) > 2.0 * l * R * (1 + 1e-12)) return fail("|b|", std::abs(b), 2.0 * l * R);
    for (long m = 0; m < l; ++m)
        if (std::abs(w[m] + b * z[m]) < R * (1 - 1e-12)) return fail("|w_m + b z_m|", std::abs(w[m] + b * z[m]), R);
    return {};
}

std::string divergence_choice(Rng& g, int) {
    const long l = integer(g, 2, 4);
    const std::size_t G = 4096;
    Poly p = random_poly(g, l, kDefaultBits, uniform(g, 0.5, 3.0));
    std::vector<cplx> part(G);
    for (std::size_t j = 0; j < G; ++j) part[j] = eval(p, std::polar(1.0, 2.0 * std::numbers::pi * j / G));
    auto c = choose_divergence_coefficient(part, l);
    double bound = 2.0 * std::numbers::pi / (l * l) + c.crossings * 2.0 * std::numbers::pi / G;
    if (c.measure > bound) return fail("measure", c.measure, bound);
    if (std::abs(c.b) > std::pow(static_cast<double>(l), 4) * (1 + 1e-12)) return fail("|b|", std::abs(c.b), std::pow(l, 4.0));
    return {};
}

// ---------------------------------------------------------------- diagnostics

Poly rotate(const Poly& p, double theta) {
    std::vector<CNum> v;
    for (std::size_t k = 0; k < p.size(); ++k) v.push_back(p[k] * CNum::unit(theta * static_cast<double>(k), p.bits()));
    return Poly(std::move(v), p.bits());
}

std::string rotation_invariance(Rng& g, int) {
    Poly p = random_poly(g, integer(g, 1, 10));
    // rotations by multiples of 2 pi / 256 map the ring grid onto itself
    double theta = 2.0 * std::numbers::pi * static_cast<double>(integer(g, 1, 255)) / 256.0;
    Poly q = rotate(p, theta);
    RadialGrid grid{64, 256};
    double b1 = bloch_norm_estimate(p, grid).value, b2 = bloch_norm_estimate(q, grid).value;
    if (std::fabs(b1 - b2) > 1e-9 * std::max(1.0, b1)) return fail("Bloch estimate moved", b2, b1);
    SectorRegion full;
    double n1 = normality_scan(p, full, grid).value, n2 = normality_scan(q, full, grid).value;
    if (std::fabs(n1 - n2) > 1e-9 * std::max(1.0, n1)) return fail("normality scan moved", n2, n1);
    return {};
}

std::string picard_monotone(Rng& g, int) {
    Poly p = random_poly(g, integer(g, 1, 8), kDefaultBits, 2.0);
    cplx zeta = unimodular(g);
    double r1 = uniform(g, 0.05, 0.5), r2 = r1 + uniform(g, 0.0, 0.5);
    ValueWindow w{0.0, 3.0, 24};
    double spacing = 0.01;
    auto a = picard_coverage(p, zeta, r1, w, spacing), b = picard_coverage(p, zeta, r2, w, spacing);
    return b.covered_fraction >= a.covered_fraction ? std::string{} : fail("coverage shrank with r", b.covered_fraction, a.covered_fraction);
}

std::string growth_monotone(Rng& g, int) {
    Poly p = random_poly(g, integer(g, 0, 30));
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(0.05 * i);
    auto rep = growth_metrics(p, grid);
    return rep.monotone ? std::string{} : "circle maxima not nondecreasing";
}

std::string lacunary_ratio(Rng&, int i) {
    int terms = 3 + i;
    auto w = gap_witnesses(lacunary(terms));
    for (const auto& x : w)
        if (x.kind == GapWitness::Kind::Hadamard) return x.ratio == 2.0 ? std::string{} : fail("Hadamard ratio", x.ratio, 2.0);
    return "no Hadamard witness";
}

// ---------------------------------------------------------------- capacity

PointCloud random_cloud(Rng& g, std::size_t n) {
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.push_back(in_disc(g, uniform(g, 0.5, 2.0)) + cplx(uniform(g, -1, 1), uniform(g, -1, 1)));
    c.provenance = "random";
    return c;
}

std::string capacity_scaling(Rng& g, int) {
    PointCloud c = random_cloud(g, static_cast<std::size_t>(integer(g, 2, 200)));
    double s = std::ldexp(1.0, static_cast<int>(integer(g, -8, 8)));
    PointCloud d = c;
    for (auto& z : d.points) z *= s;
    double a = capacity_estimate(c, 48).value, b = capacity_estimate(d, 48).value;
    return b == s * a ? std::string{} : fail("scaled estimate", b, s * a);
}

std::string capacity_rotation(Rng& g, int) {
    PointCloud c = random_cloud(g, static_cast<std::size_t>(integer(g, 2, 200)));
    PointCloud d = c;
    for (auto& z : d.points) z = {-z.imag(), z.real()};  // exact quarter turn
    double a = capacity_estimate(c, 48).value, b = capacity_estimate(d, 48).value;
    return b == a ? std::string{} : fail("rotated estimate", b, a);
}

std::string capacity_subset(Rng& g, int) {
    PointCloud c = PointCloud::disc(cplx(uniform(g, -1, 1), uniform(g, -1, 1)), uniform(g, 0.2, 1.0), 60.0);
    PointCloud sub{{}, "subset"};
    double keep = uniform(g, 0.3, 0.9);
    for (const auto& z : c.points)
        if (uniform(g, 0.0, 1.0) < keep) sub.points.push_back(z);
    if (sub.points.size() < 2) return {};
    double a = capacity_estimate(c, 48).value, b = capacity_estimate(sub, 48).value;
    return b <= 1.05 * a ? std::string{} : fail("subset estimate", b, 1.05 * a);
}

// ---------------------------------------------------------------- cli

std::string report_determinism(Rng& g, int i) {
    auto dir = std::filesystem::temp_directory_path() / ("abelu_prop_det_" + std::to_string(i));
    Poly p = random_poly(g, integer(g, 1, 20));
    nlohmann::json cfg{{"kind", "diagnose"},
                       {"seed", integer(g, 0, 1000)},
                       {"poly", poly_to_json(p)},
                       {"operations",
                        {{{"op", "growth_metrics"}, {"r_grid", {{"from", 0.0}, {"to", 0.95}, {"count", 12}}}},
                         {{"op", "gap_witnesses"}},
                         {{"op", "radial_cluster_sample"}, {"random_points", 2}, {"r_grid", {{"from", 0.0}, {"to", 0.99}, {"count", 30}}}}}}};
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
        auto c = ExperimentConfig::from_json(cfg);
        c.out_dir = dir / std::to_string(rep);
        run(c);
        std::ifstream in(c.out_dir / "report.json");
        std::stringstream ss;
        ss << in.rdbuf();
        if (rep == 0) first = ss.str();
        else if (ss.str() != first) return "report.json differs between identical runs";
    }
    std::filesystem::remove_all(dir);
    return {};
}

}  // namespace

const std::vector<Suite>& suites() {
    static const std::vector<Suite> all{
        {"numerics", "dilate composition is exact", 200, dilate_composition},
        {"numerics", "Abel identity residual", 100, abel_residual},
        {"numerics", "partial-sum differences are exact", 150, partial_sum_differences},
        {"numerics", "Cauchy bounds dominate coefficients", 1000, cauchy_bounds},
        {"numerics", "polynomial JSON round trip", 100, poly_round_trip},
        {"geometry", "Poisson kernel normalization", 20, poisson_normalization},
        {"geometry", "Stolz membership rotation invariance", 300, stolz_rotation},
        {"geometry", "sample respects piece tags", 60, sample_tags},
        {"approximation", "tail index re-summation", 100, tail_index_resum},
        {"approximation", "polynomial targets recovered", 10, polynomial_targets},
        {"approximation", "certified error monotone in tol", 2, tol_monotone},
        {"constructors", "partial sums constant between blocks", 200, block_constancy},
        {"constructors", "lem1 shift bound", 200, lem1_random},
        {"constructors", "divergence coefficient measure bound", 20, divergence_choice},
        {"diagnostics", "Bloch and normality rotation invariance", 20, rotation_invariance},
        {"diagnostics", "Picard coverage monotone in r", 40, picard_monotone},
        {"diagnostics", "circle maxima nondecreasing", 50, growth_monotone},
        {"diagnostics", "lacunary Hadamard ratio", 10, lacunary_ratio},
        {"capacity", "scaling covariance", 100, capacity_scaling},
        {"capacity", "rotation invariance", 50, capacity_rotation},
        {"capacity", "subset monotonicity within 5%", 60, capacity_subset},
        {"cli", "report determinism", 4, report_determinism},
    };
    return all;
}

SuiteResult run_suite(const Suite& s, std::uint64_t seed) {
    Rng g(seed ^ std::hash<std::string>{}(s.name));
    SuiteResult r{s.module, s.name, s.cases, 0, {}};
    for (int i = 0; i < s.cases; ++i) {
        std::string msg;
        try {
            msg = s.check(g, i);
        } catch (const std::exception& e) {
            msg = std::string("exception: ") + e.what();
        }
        if (!msg.empty()) {
            if (r.failures == 0) r.first_failure = "case " + std::to_string(i) + ": " + msg;
            ++r.failures;
        }
    }
    return r;
}

}  // namespace abelu::props
