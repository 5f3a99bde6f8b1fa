#include "abelu/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace abelu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t pow2_at_least(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

// Values of p (or p') on circles |z| = r through one FFT per ring. Each
// nonzero coefficient is stored as mantissa * 2^exponent so the scaling by
// r^k happens before rounding to double.
class RingEvaluator {
public:
    RingEvaluator(const Poly& p, bool derivative) : poly_(derivative ? abelu::derivative(p) : p) {
        degree_ = poly_.degree();
        for (long k = 0; k <= degree_; ++k) {
            const CNum& a = poly_[static_cast<std::size_t>(k)];
            if (a.is_zero()) continue;
            long e = std::max(a.re().exponent(), a.im().exponent());
            Real re = ldexp(a.re(), -e), im = ldexp(a.im(), -e);
            k_.push_back(k);
            m_.emplace_back(re.to_double(), im.to_double());
            e_.push_back(static_cast<double>(e));
        }
        fft_.SetFlag(Eigen::FFT<double>::Unscaled);
    }

    long degree() const { return degree_; }
    std::size_t nonzeros() const { return k_.size(); }
    std::size_t ring_size(std::size_t min_points) const {
        return pow2_at_least(std::max<std::size_t>(min_points, static_cast<std::size_t>(8 * std::max<long>(degree_, 0) + 64)));
    }

    // values at r * exp(2 pi i j / N); returns the evaluator used
    std::string values(double r, std::size_t N, std::vector<cplx>& out) {
        out.assign(N, cplx(0.0, 0.0));
        if (k_.empty()) return "fft";
        if (r == 0.0) {
            cplx v = k_.front() == 0 ? std::ldexp(1.0, static_cast<int>(e_.front())) * m_.front() : cplx(0.0, 0.0);
            std::fill(out.begin(), out.end(), v);
            return "fft";
        }
        std::vector<cplx> buf(N, cplx(0.0, 0.0));
        double lr = std::log2(r);
        bool ok = true;
        for (std::size_t i = 0; i < k_.size(); ++i) {
            double ex = e_[i] + static_cast<double>(k_[i]) * lr;
            if (ex > 1000.0) {
                ok = false;
                break;
            }
            buf[static_cast<std::size_t>(k_[i]) % N] += m_[i] * std::exp2(ex);
        }
        if (ok) {
            fft_.inv(out, buf);
            return "fft";
        }
        std::vector<cplx> zs(N);
        for (std::size_t j = 0; j < N; ++j) zs[j] = std::polar(r, kTwoPi * static_cast<double>(j) / static_cast<double>(N));
        out = eval_many(poly_, zs);
        return "mpfr";
    }

private:
    Poly poly_;
    long degree_ = -1;
    std::vector<long> k_;
    std::vector<cplx> m_;
    std::vector<double> e_;
    Eigen::FFT<double> fft_;
};

nlohmann::json cplx_json(cplx z) { return {z.real(), z.imag()}; }

std::string merge_evaluator(const std::string& a, const std::string& b) {
    if (a.empty() || a == b) return b;
    return "mixed";
}

}  // namespace

std::string to_csv(const Series& s) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
    os << "\n";
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
    return os.str();
}

Poly lacunary(int terms, long bits) {
    if (terms < 0 || terms > 40) throw std::invalid_argument("lacunary: terms must lie in 0..40");
    if (terms == 0) return Poly(bits);
    std::vector<CNum> c((std::size_t{1} << terms) + 1, CNum(bits));
    for (int n = 1; n <= terms; ++n) c[std::size_t{1} << n] = CNum(cplx(1.0, 0.0), bits);
    return Poly(std::move(c), bits);
}

// ---------------------------------------------------------------- dilate density

DilateDensityReport dilate_density_check(const Poly& f, std::span<const double> radii, const Arc& K, const Poly& phi,
                                         bool report_only, std::size_t points) {
    if (points < 2) throw std::invalid_argument("dilate_density_check: need at least 2 arc points");
    DilateDensityReport rep;
    rep.points = points;
    rep.report_only = report_only;
    std::vector<cplx> zs(points);
    double lo = K.center_angle - K.half_width;
    for (std::size_t j = 0; j < points; ++j)
        zs[j] = std::polar(1.0, lo + K.length() * static_cast<double>(j) / static_cast<double>(points - 1));
    std::vector<cplx> target = eval_many(phi, zs);
    rep.best_error = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("dilate_density_check: radii must lie in [0,1)");
        std::vector<cplx> scaled(zs);
        for (auto& z : scaled) z *= r;
        std::vector<cplx> v = eval_many(f, scaled);
        double e = 0.0;
        for (std::size_t j = 0; j < points; ++j) e = std::max(e, std::abs(v[j] - target[j]));
        rep.radii.push_back(r);
        rep.errors.push_back(e);
        if (e < rep.best_error) {
            rep.best_error = e;
            rep.best_r = r;
        }
    }
    return rep;
}

nlohmann::json DilateDensityReport::to_json() const {
    return {{"kind", "dilate_density"}, {"radii", radii},   {"errors", errors},          {"best_r", best_r},
            {"best_error", best_error}, {"points", points}, {"report_only", report_only}};
}

Series DilateDensityReport::series() const {
    Series s{"dilate_density", {"r", "sup_error"}, {}};
    for (std::size_t i = 0; i < radii.size(); ++i) s.rows.push_back({radii[i], errors[i]});
    return s;
}

// ---------------------------------------------------------------- growth

GrowthReport growth_metrics(const Poly& f, std::span<const double> r_grid, const std::optional<CompactTarget>& A) {
    if (A) A->validate();
    RingEvaluator ring(f, false);
    GrowthReport rep;
    rep.circle_points = ring.ring_size(0);
    rep.margin_factor = margin_factor(std::max<long>(ring.degree(), 0), rep.circle_points);
    std::vector<cplx> vals;
    for (double r : r_grid) {
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("growth_metrics: r_grid must lie in [0,1)");
        rep.evaluator = merge_evaluator(rep.evaluator, ring.values(r, rep.circle_points, vals));
        double m = 0.0;
        for (cplx v : vals) m = std::max(m, std::abs(v));
        rep.r.push_back(r);
        rep.M.push_back(m);
        rep.M_certified.push_back(m * rep.margin_factor);
        std::optional<double> ma;
        if (A) {
            if (A->disc_r && r <= *A->disc_r) ma = m;
            for (const auto& s : A->segments)
                if (r >= s.from_r && r <= s.to_r) {
                    double v = std::abs(eval(f, std::polar(r, s.angle)));
                    ma = std::max(ma.value_or(0.0), v);
                }
        }
        rep.M_A.push_back(ma);
    }
    for (std::size_t i = 1; i < rep.r.size(); ++i) {
        if (rep.r[i] >= rep.r[i - 1] && rep.M_certified[i] < rep.M[i - 1] * (1.0 - 1e-12)) rep.monotone = false;
        double g0 = log_plus(log_plus(rep.M[i - 1])), g1 = log_plus(log_plus(rep.M[i]));
        rep.hornblower_partial += 0.5 * (g0 + g1) * (rep.r[i] - rep.r[i - 1]);
    }
    return rep;
}

nlohmann::json GrowthReport::to_json() const {
    nlohmann::json ma = nlohmann::json::array();
    for (const auto& x : M_A) ma.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
    return {{"kind", "growth"},
            {"r", r},
            {"M", M},
            {"M_certified", M_certified},
            {"M_A", ma},
            {"hornblower_partial", hornblower_partial},
            {"circle_points", circle_points},
            {"margin_factor", margin_factor},
            {"monotone", monotone},
            {"evaluator", evaluator}};
}

Series GrowthReport::series() const {
    Series s{"growth", {"r", "M", "M_certified", "M_A"}, {}};
    for (std::size_t i = 0; i < r.size(); ++i)
        s.rows.push_back({r[i], M[i], M_certified[i], M_A[i].value_or(std::numeric_limits<double>::quiet_NaN())});
    return s;
}

// ---------------------------------------------------------------- gaps

std::string to_string(GapWitness::Kind k) {
    switch (k) {
        case GapWitness::Kind::Hadamard: return "hadamard";
        case GapWitness::Kind::HadamardOstrowski: return "hadamard_ostrowski";
        case GapWitness::Kind::Ostrowski: return "ostrowski";
    }
    return "unknown";
}

nlohmann::json GapWitness::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}, {"ratio", ratio}, {"root_bound", root_bound}};
    if (kind == Kind::Hadamard)
        j["support"] = support;
    else
        j["intervals"] = intervals;
    return j;
}

std::vector<GapWitness> gap_witnesses(const Poly& f, double theta, double sigma, long k_min) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("gap_witnesses: theta must lie in (0,1)");
    if (!(sigma > 1.0)) throw std::invalid_argument("gap_witnesses: sigma must exceed 1");
    k_min = std::max<long>(k_min, 1);
    std::vector<GapWitness> out;
    const long deg = f.degree();
    if (deg < k_min) return out;

    std::vector<double> root(static_cast<std::size_t>(deg) + 1, 0.0);
    std::vector<long> support;
    for (long k = k_min; k <= deg; ++k) {
        const CNum& a = f[static_cast<std::size_t>(k)];
        if (a.is_zero()) continue;
        support.push_back(k);
        root[static_cast<std::size_t>(k)] = std::exp2(abs(a).log2_abs() / static_cast<double>(k));
    }

    if (support.size() >= 2) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < support.size(); ++i)
            mn = std::min(mn, static_cast<double>(support[i]) / static_cast<double>(support[i - 1]));
        if (mn >= sigma) out.push_back({GapWitness::Kind::Hadamard, support, {}, mn, 0.0});
    }

    std::vector<std::pair<long, long>> intervals;
    double min_ratio = std::numeric_limits<double>::infinity(), max_ratio = 0.0, bound = 0.0;
    long k = k_min;
    while (k <= deg) {
        if (root[static_cast<std::size_t>(k)] > theta) {
            ++k;
            continue;
        }
        long s = k;
        double b = 0.0;
        while (k <= deg && root[static_cast<std::size_t>(k)] <= theta) b = std::max(b, root[static_cast<std::size_t>(k++)]);
        long p = s - 1, q = k - 1;
        if (p < 1) continue;
        double ratio = static_cast<double>(q) / static_cast<double>(p);
        if (ratio < sigma) continue;
        intervals.emplace_back(p, q);
        min_ratio = std::min(min_ratio, ratio);
        max_ratio = std::max(max_ratio, ratio);
        bound = std::max(bound, b);
    }
    if (!intervals.empty()) {
        out.push_back({GapWitness::Kind::HadamardOstrowski, {}, intervals, min_ratio, bound});
        out.push_back({GapWitness::Kind::Ostrowski, {}, intervals, max_ratio, bound});
    }
    return out;
}

// ---------------------------------------------------------------- normality, Bloch

void SectorRegion::validate() const {
    if (!(r_min >= 0.0 && r_min <= r_max && r_max < 1.0)) throw std::invalid_argument("sector radii must satisfy 0 <= r_min <= r_max < 1");
    if (!(half_width > 0.0)) throw std::invalid_argument("sector half width must be positive");
}

nlohmann::json ScanReport::to_json() const {
    return {{"value", value},
            {"argmax", cplx_json(argmax)},
            {"rings", rings},
            {"ring_points", ring_points},
            {"r_cutoff", r_cutoff},
            {"tail_bound", tail_bound},
            {"evaluator", evaluator}};
}

ScanReport normality_scan(const Poly& f, const SectorRegion& region, const RadialGrid& grid) {
    region.validate();
    if (grid.radial < 1) throw std::invalid_argument("normality_scan: need at least one ring");
    RingEvaluator F(f, false), D(f, true);
    ScanReport rep;
    rep.ring_points = F.ring_size(grid.angular);
    rep.r_cutoff = region.r_max;
    std::vector<cplx> fv, dv;
    std::size_t rings = region.r_min == region.r_max ? 1 : std::max<std::size_t>(grid.radial, 2);
    for (std::size_t i = 0; i < rings; ++i) {
        double r = rings == 1 ? region.r_min
                              : region.r_min + (region.r_max - region.r_min) * static_cast<double>(i) / static_cast<double>(rings - 1);
        rep.evaluator = merge_evaluator(rep.evaluator, F.values(r, rep.ring_points, fv));
        rep.evaluator = merge_evaluator(rep.evaluator, D.values(r, rep.ring_points, dv));
        std::size_t count = r == 0.0 ? 1 : rep.ring_points;
        for (std::size_t j = 0; j < count; ++j) {
            double t = kTwoPi * static_cast<double>(j) / static_cast<double>(rep.ring_points);
            if (r > 0.0 && angular_distance(t, region.center) > region.half_width) continue;
            double v = (1.0 - r * r) * std::abs(dv[j]) / (1.0 + std::norm(fv[j]));
            if (v > rep.value) {
                rep.value = v;
                rep.argmax = std::polar(r, t);
            }
        }
    }
    rep.rings = rings;
    return rep;
}

ScanReport bloch_norm_estimate(const Poly& f, const RadialGrid& grid) {
    RingEvaluator D(f, true);
    ScanReport rep;
    const long d = f.degree();
    if (d < 1) {
        rep.evaluator = "exact";
        return rep;
    }
    rep.ring_points = D.ring_size(grid.angular);
    // every term k |a_k| (1 - r^2) r^(k-1) decreases beyond sqrt((k-1)/(k+1))
    double rd = std::sqrt(static_cast<double>(d - 1) / static_cast<double>(d + 1));
    rep.r_cutoff = rd;
    Real rr(rd, f.bits()), s(f.bits()), pw(1.0, f.bits());
    for (long k = 1; k <= d; ++k) {
        s += Real(static_cast<double>(k), f.bits()) * abs(f[static_cast<std::size_t>(k)]) * pw;
        pw *= rr;
    }
    rep.tail_bound = (1.0 - rd * rd) * s.to_double();

    std::vector<double> radii{0.0};
    std::size_t n = std::max<std::size_t>(grid.radial, 2);
    if (rd > 0.0) {
        // 1 - r log-spaced between 1 and 1 - rd
        double g = std::log(1.0 - rd);
        for (std::size_t i = 1; i < n; ++i) radii.push_back(1.0 - std::exp(g * static_cast<double>(i) / static_cast<double>(n - 1)));
    }
    std::vector<cplx> dv;
    for (double r : radii) {
        rep.evaluator = merge_evaluator(rep.evaluator, D.values(r, rep.ring_points, dv));
        std::size_t count = r == 0.0 ? 1 : rep.ring_points;
        for (std::size_t j = 0; j < count; ++j) {
            double v = (1.0 - r * r) * std::abs(dv[j]);
            if (v > rep.value) {
                rep.value = v;
                rep.argmax = std::polar(r, kTwoPi * static_cast<double>(j) / static_cast<double>(rep.ring_points));
            }
        }
    }
    rep.rings = radii.size();
    return rep;
}

// ---------------------------------------------------------------- Picard coverage

nlohmann::json CoverageReport::to_json() const {
    return {{"kind", "picard_coverage"},
            {"zeta", cplx_json(zeta)},
            {"r", r},
            {"spacing", spacing},
            {"domain_points", domain_points},
            {"window", {{"center", cplx_json(window.center)}, {"half", window.half}, {"cells", window.cells}}},
            {"covered_fraction", covered_fraction},
            {"missed", missed}};
}

CoverageReport picard_coverage(const Poly& f, cplx zeta, double r, const ValueWindow& window, double spacing) {
    if (!(r > 0.0)) throw std::invalid_argument("picard_coverage: r must be positive");
    if (!(spacing > 0.0)) throw std::invalid_argument("picard_coverage: spacing must be positive");
    if (window.cells == 0 || !(window.half > 0.0)) throw std::invalid_argument("picard_coverage: empty value window");
    CoverageReport rep;
    rep.zeta = zeta;
    rep.r = r;
    rep.spacing = spacing;
    rep.window = window;
    long n = static_cast<long>(std::ceil(r / spacing));
    std::vector<cplx> zs;
    for (long i = -n; i <= n; ++i)
        for (long j = -n; j <= n; ++j) {
            cplx off(spacing * static_cast<double>(i), spacing * static_cast<double>(j));
            cplx z = zeta + off;
            if (std::abs(off) < r && std::abs(z) < 1.0) zs.push_back(z);
        }
    rep.domain_points = zs.size();
    const std::size_t C = window.cells;
    std::vector<char> hit(C * C, 0);
    const double cell = 2.0 * window.half / static_cast<double>(C);
    const double x0 = window.center.real() - window.half, y0 = window.center.imag() - window.half;
    for (cplx v : eval_many(f, zs)) {
        double cx = std::floor((v.real() - x0) / cell), cy = std::floor((v.imag() - y0) / cell);
        if (cx < 0 || cy < 0 || cx >= static_cast<double>(C) || cy >= static_cast<double>(C)) continue;
        hit[static_cast<std::size_t>(cy) * C + static_cast<std::size_t>(cx)] = 1;
    }
    std::size_t covered = 0;
    for (std::size_t row = 0; row < C; ++row)
        for (std::size_t col = 0; col < C; ++col) {
            if (hit[row * C + col])
                ++covered;
            else
                rep.missed.emplace_back(col, row);
        }
    rep.covered_fraction = static_cast<double>(covered) / static_cast<double>(C * C);
    return rep;
}

// ---------------------------------------------------------------- radial cluster

nlohmann::json ClusterReport::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (cplx x : values) v.push_back(cplx_json(x));
    return {{"kind", "radial_cluster"},
            {"zeta", cplx_json(zeta)},
            {"r", r},
            {"values", v},
            {"box", {{"center", cplx_json(box.center)}, {"half", box.half}, {"cells", box.cells}}},
            {"delta", delta},
            {"approached_fraction", approached_fraction},
            {"covering_radius", covering_radius},
            {"tail_oscillation", tail_oscillation}};
}

Series ClusterReport::series() const {
    Series s{"radial_cluster", {"r", "re", "im"}, {}};
    for (std::size_t i = 0; i < r.size(); ++i) s.rows.push_back({r[i], values[i].real(), values[i].imag()});
    return s;
}

ClusterReport radial_cluster_sample(const Poly& f, cplx zeta, std::span<const double> r_grid, const ValueWindow& box,
                                    double delta) {
    if (box.cells == 0 || !(box.half > 0.0)) throw std::invalid_argument("radial_cluster_sample: empty box");
    if (!(delta > 0.0)) throw std::invalid_argument("radial_cluster_sample: delta must be positive");
    ClusterReport rep;
    rep.zeta = zeta;
    rep.box = box;
    rep.delta = delta;
    std::vector<cplx> zs;
    for (double r : r_grid) {
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("radial_cluster_sample: r_grid must lie in [0,1)");
        rep.r.push_back(r);
        zs.push_back(r * zeta);
    }
    rep.values = eval_many(f, zs);
    const std::size_t C = box.cells;
    const double cell = 2.0 * box.half / static_cast<double>(C);
    std::size_t near = 0;
    for (std::size_t row = 0; row < C; ++row)
        for (std::size_t col = 0; col < C; ++col) {
            cplx g(box.center.real() - box.half + (static_cast<double>(col) + 0.5) * cell,
                   box.center.imag() - box.half + (static_cast<double>(row) + 0.5) * cell);
            double d = std::numeric_limits<double>::infinity();
            for (cplx v : rep.values) d = std::min(d, std::abs(v - g));
            if (d <= delta) ++near;
            rep.covering_radius = std::max(rep.covering_radius, d);
        }
    rep.approached_fraction = static_cast<double>(near) / static_cast<double>(C * C);
    const std::size_t n = rep.values.size();
    for (std::size_t i = n - std::max<std::size_t>(n / 10, std::min<std::size_t>(n, 2)); i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) rep.tail_oscillation = std::max(rep.tail_oscillation, std::abs(rep.values[i] - rep.values[j]));
    return rep;
}

// ---------------------------------------------------------------- two radii

nlohmann::json TwoRadiiReport::to_json() const {
    return {{"kind", "two_radii"}, {"max_ratio", max_ratio}, {"at_r", at_r}, {"at_radius", at_radius},
            {"r", r},              {"ratio1", ratio1},       {"ratio2", ratio2}};
}

Series TwoRadiiReport::series() const {
    Series s{"two_radii", {"r", "ratio1", "ratio2"}, {}};
    for (std::size_t i = 0; i < r.size(); ++i) s.rows.push_back({r[i], ratio1[i], ratio2[i]});
    return s;
}

TwoRadiiReport two_radii_bound_check(const Poly& f, cplx zeta1, cplx zeta2, double c, std::span<const double> r_grid) {
    if (zeta1 == zeta2) throw std::invalid_argument("two_radii_bound_check: zeta1 and zeta2 must differ");
    if (!(c > 0.0)) throw std::invalid_argument("two_radii_bound_check: c must be positive");
    TwoRadiiReport rep;
    for (double r : r_grid) {
        if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("two_radii_bound_check: r_grid must lie in [0,1)");
        double q[2];
        cplx zs[2] = {r * zeta1, r * zeta2};
        for (int i = 0; i < 2; ++i) {
            double h = harmonic_majorant(zs[i], zeta1, zeta2, c);
            q[i] = std::abs(eval(f, zs[i])) * std::exp(-h);
            if (q[i] > rep.max_ratio || (rep.r.empty() && i == 0)) {
                rep.max_ratio = q[i];
                rep.at_r = r;
                rep.at_radius = i + 1;
            }
        }
        rep.r.push_back(r);
        rep.ratio1.push_back(q[0]);
        rep.ratio2.push_back(q[1]);
    }
    return rep;
}

// ---------------------------------------------------------------- partial sums

std::vector<cplx> circle_grid(std::size_t n) {
    std::vector<cplx> z(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = std::polar(1.0, kTwoPi * static_cast<double>(j) / static_cast<double>(n));
    return z;
}

nlohmann::json DivergenceProfile::to_json() const {
    return {{"kind", "partial_sum_divergence"},
            {"checkpoints", checkpoints},
            {"points", min_ratio.size()},
            {"fraction_per_checkpoint", fraction_per_checkpoint},
            {"fraction", fraction}};
}

Series DivergenceProfile::series() const {
    Series s{"partial_sum_divergence", {"k", "fraction"}, {}};
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        s.rows.push_back({static_cast<double>(checkpoints[i]), fraction_per_checkpoint[i]});
    return s;
}

DivergenceProfile partial_sum_divergence_profile(const Poly& f, std::span<const cplx> points,
                                                 std::span<const long> checkpoints) {
    if (points.empty()) throw std::invalid_argument("partial_sum_divergence_profile: no points");
    const long deg = f.degree();
    for (long k : checkpoints) {
        if (k < 1) throw std::invalid_argument("partial_sum_divergence_profile: checkpoints must be >= 1");
        if (deg >= 0 && k > deg) throw std::invalid_argument("partial_sum_divergence_profile: checkpoint beyond deg(f)");
    }
    DivergenceProfile rep;
    rep.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    std::vector<std::size_t> good(checkpoints.size(), 0);
    std::size_t all_good = 0;
    for (cplx z : points) {
        PartialSumTrace tr = partial_sums_at(f, CNum(z, f.bits()));
        std::vector<double> mods;
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            long k = checkpoints[i];
            double m = tr.values.empty() ? 0.0 : abs(tr.values[static_cast<std::size_t>(std::clamp<long>(k, 0, std::max<long>(deg, 0)))]).to_double();
            mods.push_back(m);
            double ratio = m / static_cast<double>(k);
            mn = std::min(mn, ratio);
            if (m >= static_cast<double>(k)) ++good[i];
        }
        if (checkpoints.empty()) mn = 0.0;
        rep.min_ratio.push_back(mn);
        rep.modulus.push_back(std::move(mods));
        if (mn >= 1.0) ++all_good;
    }
    const double n = static_cast<double>(points.size());
    for (std::size_t g : good) rep.fraction_per_checkpoint.push_back(static_cast<double>(g) / n);
    rep.fraction = static_cast<double>(all_good) / n;
    return rep;
}

}  // namespace abelu
