#include "abelu/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace abelu {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t count_for(double length, double density) {
    return static_cast<std::size_t>(std::ceil(length * density - 1e-9));
}

// Radial extent of a segment that is not already covered by the disc.
std::pair<double, double> segment_extent(const CompactTarget& K, const RadialSegment& s) {
    double lo = s.from_r;
    if (K.disc_r) lo = std::max(lo, *K.disc_r);
    return {lo, s.to_r};
}

}  // namespace

double normalize_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double angular_distance(double a, double b) {
    double d = std::fabs(normalize_angle(a) - normalize_angle(b));
    return std::min(d, kTwoPi - d);
}

Arc::Arc(double center, double half) : center_angle(normalize_angle(center)), half_width(half) {
    if (!(half > 0.0) || !(half < std::numbers::pi)) throw GeometryError("arc half width must lie in (0, pi)");
}

bool Arc::contains_angle(double theta, double slack) const {
    return angular_distance(theta, center_angle) <= half_width + slack;
}

bool arcs_overlap(const Arc& a, const Arc& b) {
    return angular_distance(a.center_angle, b.center_angle) <= a.half_width + b.half_width;
}

double arc_measure(std::span<const Arc> arcs) {
    double total = 0.0;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        for (std::size_t j = i + 1; j < arcs.size(); ++j)
            if (arcs_overlap(arcs[i], arcs[j])) throw GeometryError("arcs overlap");
        total += arcs[i].length();
    }
    if (total >= kTwoPi) throw GeometryError("arcs cover the whole circle");
    return total;
}

void CompactTarget::validate() const {
    if (disc_r && (!(*disc_r >= 0.0) || !(*disc_r < 1.0))) throw GeometryError("central disc radius must lie in [0, 1)");
    for (const auto& a : arcs)
        if (!(a.half_width > 0.0) || !(a.half_width < std::numbers::pi))
            throw GeometryError("arc half width must lie in (0, pi)");
    arc_measure(arcs);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.from_r >= 0.0) || !(s.to_r <= 1.0) || !(s.from_r < s.to_r))
            throw GeometryError("radial segment needs 0 <= from < to <= 1");
        auto [lo, hi] = segment_extent(*this, s);
        if (lo >= hi) throw GeometryError("radial segment lies inside the central disc");
        if (hi >= 1.0)
            for (const auto& a : arcs)
                if (a.contains_angle(s.angle)) throw GeometryError("radial segment touches an arc");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& t = segments[j];
            auto [lo2, hi2] = segment_extent(*this, t);
            bool same_ray = angular_distance(s.angle, t.angle) < 1e-12;
            if (same_ray && lo <= hi2 && lo2 <= hi) throw GeometryError("radial segments overlap");
            if (!same_ray && lo == 0.0 && lo2 == 0.0) throw GeometryError("radial segments meet at the origin");
        }
    }
    if (!disc_r && arcs.empty() && segments.empty()) throw GeometryError("empty compact target");
}

std::vector<PieceRef> CompactTarget::pieces() const {
    std::vector<PieceRef> out;
    if (disc_r) out.push_back({PieceKind::Disc, 0});
    for (std::size_t i = 0; i < arcs.size(); ++i) out.push_back({PieceKind::Arc, i});
    for (std::size_t i = 0; i < segments.size(); ++i) out.push_back({PieceKind::Segment, i});
    return out;
}

SampleGrid sample(const CompactTarget& K, double density) {
    if (!(density > 0.0)) throw std::invalid_argument("sample: density must be positive");
    K.validate();
    SampleGrid g;
    g.density = density;
    std::size_t tag = 0;
    if (K.disc_r) {
        double rho = *K.disc_r;
        g.points.emplace_back(0.0, 0.0);
        g.piece_tags.push_back(tag);
        std::size_t rings = rho > 0.0 ? std::max<std::size_t>(1, count_for(rho, density)) : 0;
        for (std::size_t j = 1; j <= rings; ++j) {
            double r = rho * static_cast<double>(j) / static_cast<double>(rings);
            std::size_t m = std::max<std::size_t>(3, count_for(kTwoPi * r, density));
            for (std::size_t k = 0; k < m; ++k) {
                g.points.push_back(std::polar(r, kTwoPi * static_cast<double>(k) / static_cast<double>(m)));
                g.piece_tags.push_back(tag);
            }
        }
        ++tag;
    }
    for (const auto& a : K.arcs) {
        std::size_t m = std::max<std::size_t>(2, count_for(a.length(), density) + 1);
        for (std::size_t k = 0; k < m; ++k) {
            double t = a.center_angle - a.half_width + a.length() * static_cast<double>(k) / static_cast<double>(m - 1);
            g.points.push_back(std::polar(1.0, t));
            g.piece_tags.push_back(tag);
        }
        ++tag;
    }
    for (const auto& s : K.segments) {
        auto [lo, hi] = segment_extent(K, s);
        bool skip_lo = K.disc_r && lo == *K.disc_r;
        bool skip_hi = hi >= 1.0;
        std::size_t m = std::max<std::size_t>(1, count_for(hi - lo, density));
        for (std::size_t k = skip_lo ? 1 : 0; k <= m; ++k) {
            if (k == m && skip_hi) break;
            double r = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(m);
            g.points.push_back(std::polar(r, s.angle));
            g.piece_tags.push_back(tag);
        }
        ++tag;
    }
    return g;
}

double distance_to_piece(const CompactTarget& K, const PieceRef& piece, cplx z) {
    switch (piece.kind) {
        case PieceKind::Disc:
            return std::max(0.0, std::abs(z) - K.disc_r.value_or(0.0));
        case PieceKind::Arc: {
            const Arc& a = K.arcs.at(piece.index);
            double t = std::arg(z);
            if (a.contains_angle(t)) return std::fabs(std::abs(z) - 1.0);
            double lo = a.center_angle - a.half_width, hi = a.center_angle + a.half_width;
            return std::min(std::abs(z - std::polar(1.0, lo)), std::abs(z - std::polar(1.0, hi)));
        }
        case PieceKind::Segment: {
            const RadialSegment& s = K.segments.at(piece.index);
            cplx dir = std::polar(1.0, s.angle);
            double t = std::clamp((z * std::conj(dir)).real(), s.from_r, s.to_r);
            return std::abs(z - t * dir);
        }
    }
    return std::numeric_limits<double>::infinity();
}

double poisson_kernel(cplx z, cplx zeta) {
    double a = std::abs(z);
    if (!(a < 1.0)) throw std::domain_error("poisson_kernel: |z| must be < 1");
    return (1.0 - a) * (1.0 + a) / std::norm(zeta - z);
}

double harmonic_majorant(cplx z, cplx zeta1, cplx zeta2, double c) {
    if (zeta1 == zeta2) throw std::invalid_argument("harmonic_majorant: boundary points must differ");
    return c * (poisson_kernel(z, zeta1) + poisson_kernel(z, zeta2));
}

StolzAngle::StolzAngle(cplx v, double alpha) : vertex(v), opening(alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("Stolz angle opening must exceed 1");
}

bool stolz_contains(const StolzAngle& S, cplx z) {
    double a = std::abs(z);
    return a < 1.0 && std::abs(z - S.vertex) < S.opening * (1.0 - a);
}

nlohmann::json target_to_json(const CompactTarget& K) {
    nlohmann::json j;
    j["disc_r"] = K.disc_r ? nlohmann::json(*K.disc_r) : nlohmann::json(nullptr);
    j["arcs"] = nlohmann::json::array();
    for (const auto& a : K.arcs) j["arcs"].push_back({{"center", a.center_angle}, {"halfwidth", a.half_width}});
    j["segments"] = nlohmann::json::array();
    for (const auto& s : K.segments) j["segments"].push_back({{"angle", s.angle}, {"from", s.from_r}, {"to", s.to_r}});
    return j;
}

CompactTarget target_from_json(const nlohmann::json& j) {
    CompactTarget K;
    if (j.contains("disc_r") && !j["disc_r"].is_null()) K.disc_r = j["disc_r"].get<double>();
    if (j.contains("arcs"))
        for (const auto& a : j["arcs"]) K.arcs.emplace_back(a.at("center").get<double>(), a.at("halfwidth").get<double>());
    if (j.contains("segments"))
        for (const auto& s : j["segments"])
            K.segments.push_back({s.at("angle").get<double>(), s.at("from").get<double>(), s.at("to").get<double>()});
    K.validate();
    return K;
}

}  // namespace abelu
