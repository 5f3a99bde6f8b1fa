#include "abelu/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace abelu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void add_ring(std::vector<cplx>& pts, cplx c, double r, double density) {
    std::size_t m = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil(kTwoPi * r * density)));
    for (std::size_t k = 0; k < m; ++k) pts.push_back(c + std::polar(r, kTwoPi * static_cast<double>(k) / static_cast<double>(m)));
}

std::vector<double> ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

void PointCloud::validate() const {
    if (points.empty()) throw std::invalid_argument("point cloud is empty");
    std::vector<cplx> s(points);
    std::sort(s.begin(), s.end(), [](cplx a, cplx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); });
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] == s[i - 1]) throw std::invalid_argument("point cloud contains duplicate points");
}

PointCloud PointCloud::disc(cplx center, double radius, double density) {
    if (!(radius > 0.0) || !(density > 0.0)) throw std::invalid_argument("disc cloud needs positive radius and density");
    PointCloud c{{center}, "disc"};
    std::size_t rings = static_cast<std::size_t>(std::ceil(radius * density));
    for (std::size_t j = 1; j <= rings; ++j)
        add_ring(c.points, center, radius * static_cast<double>(j) / static_cast<double>(rings), density);
    return c;
}

PointCloud PointCloud::segment(cplx a, cplx b, double density) {
    double L = std::abs(b - a);
    if (!(L > 0.0) || !(density > 0.0)) throw std::invalid_argument("segment cloud needs distinct endpoints");
    std::size_t n = static_cast<std::size_t>(std::ceil(L * density));
    PointCloud c{{}, "segment"};
    for (std::size_t k = 0; k <= n; ++k) c.points.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(n)));
    return c;
}

PointCloud PointCloud::annulus(double r_in, double r_out, double density) {
    if (!(r_in > 0.0 && r_out > r_in) || !(density > 0.0)) throw std::invalid_argument("annulus cloud needs 0 < r_in < r_out");
    PointCloud c{{}, "annulus"};
    std::size_t rings = static_cast<std::size_t>(std::ceil((r_out - r_in) * density));
    for (std::size_t j = 0; j <= rings; ++j)
        add_ring(c.points, 0.0, r_in + (r_out - r_in) * static_cast<double>(j) / static_cast<double>(rings), density);
    return c;
}

nlohmann::json CapacityEstimate::to_json() const {
    return {{"value", value}, {"transfinite_diameter", transfinite_diameter}, {"m", m}, {"cloud_size", cloud_size},
            {"method", method}};
}

CapacityEstimate capacity_estimate(const PointCloud& cloud, std::size_t m) {
    cloud.validate();
    const auto& z = cloud.points;
    CapacityEstimate out;
    out.cloud_size = z.size();
    if (z.size() < 2) {
        out.m = z.size();
        return out;
    }
    if (m < 2) throw std::invalid_argument("capacity_estimate: m must be at least 2");
    m = std::min(m, z.size());

    // first point: largest modulus, ties by smallest argument in [0, 2pi)
    std::size_t first = 0;
    for (std::size_t i = 1; i < z.size(); ++i) {
        double a = std::abs(z[i]), b = std::abs(z[first]);
        if (a > b || (a == b && normalize_angle(std::arg(z[i])) < normalize_angle(std::arg(z[first])))) first = i;
    }
    // log2 of each distance product is kept as an integer exponent plus log2 of
    // the mantissas, so power-of-two scalings of the cloud act exactly
    std::vector<long> expsum(z.size(), 0);
    std::vector<double> mantsum(z.size(), 0.0);
    std::vector<char> taken(z.size(), 0);
    std::size_t last = first;
    taken[first] = 1;
    long E = 0;
    double L = 0.0;
    for (std::size_t k = 1; k < m; ++k) {
        std::size_t best = z.size();
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (taken[i]) continue;
            int e = 0;
            double mant = std::frexp(std::abs(z[i] - z[last]), &e);
            expsum[i] += e;
            mantsum[i] += std::log2(mant);
            if (best == z.size() || static_cast<double>(expsum[i] - expsum[best]) + (mantsum[i] - mantsum[best]) > 0.0) best = i;
        }
        taken[best] = 1;
        E += expsum[best];
        L += mantsum[best];
        last = best;
    }
    const long N = static_cast<long>(m * (m - 1) / 2);
    long q = E / N, rem = E % N;
    if (rem < 0) {
        rem += N;
        --q;
    }
    const double frac = std::exp2((static_cast<double>(rem) + L) / static_cast<double>(N));
    const double md = static_cast<double>(m);
    out.m = m;
    out.transfinite_diameter = std::ldexp(frac, static_cast<int>(q));
    out.value = std::ldexp(frac * std::pow(md, -1.0 / (md - 1.0)), static_cast<int>(q));
    return out;
}

void AnnulusRegion::validate() const {
    if (!(r_in > 1.0)) throw std::invalid_argument("annulus must stay away from the closed unit disc");
    if (!(r_out >= r_in)) throw std::invalid_argument("annulus needs r_out >= r_in");
    if (!(density > 0.0)) throw std::invalid_argument("annulus density must be positive");
}

nlohmann::json CapacityCurve::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) pts.push_back({{"n", p.n}, {"cloud_size", p.cloud_size}, {"estimate", p.estimate.to_json()}});
    return {{"kind", "sublevel_capacity"},
            {"M", M},
            {"region", {{"r_in", region.r_in}, {"r_out", region.r_out}, {"density", region.density}}},
            {"grid_points", grid_points},
            {"curve", pts}};
}

Series CapacityCurve::series() const {
    Series s{"capacity_curve", {"n", "capacity", "cloud_size"}, {}};
    for (const auto& p : points)
        s.rows.push_back({static_cast<double>(p.n), p.estimate.value, static_cast<double>(p.cloud_size)});
    return s;
}

CapacityCurve sublevel_capacity_curve(const Poly& f, const AnnulusRegion& K, double M, std::span<const long> checkpoints,
                                      std::size_t m) {
    K.validate();
    if (!(M > 0.0)) throw std::invalid_argument("sublevel_capacity_curve: M must be positive");
    const long deg = f.degree();
    for (long k : checkpoints)
        if (k < 0 || (deg >= 0 && k > deg)) throw std::invalid_argument("sublevel_capacity_curve: checkpoint beyond deg(f)");
    PointCloud grid = PointCloud::annulus(K.r_in, K.r_out, K.density);
    CapacityCurve curve;
    curve.M = M;
    curve.region = K;
    curve.grid_points = grid.points.size();

    std::vector<std::vector<double>> mods(grid.points.size());
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        PartialSumTrace tr = partial_sums_at(f, CNum(grid.points[i], f.bits()));
        for (long k : checkpoints)
            mods[i].push_back(tr.values.empty() ? 0.0 : abs(tr.values[static_cast<std::size_t>(k)]).to_double());
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        PointCloud sub{{}, "sublevel"};
        for (std::size_t i = 0; i < grid.points.size(); ++i)
            if (mods[i][c] <= M) sub.points.push_back(grid.points[i]);
        CurvePoint p;
        p.n = checkpoints[c];
        p.cloud_size = sub.points.size();
        if (!sub.points.empty()) p.estimate = capacity_estimate(sub, m);
        curve.points.push_back(p);
    }
    return curve;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
    auto rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace abelu
