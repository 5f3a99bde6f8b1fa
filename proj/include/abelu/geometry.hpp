#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace abelu {

using cplx = std::complex<double>;

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Closed subarc of the unit circle.
struct Arc {
    double center_angle = 0.0;  // normalized to [0, 2pi)
    double half_width = 0.0;    // in (0, pi)

    Arc() = default;
    Arc(double center, double half);

    bool contains_angle(double theta, double slack = 0.0) const;
    double length() const { return 2.0 * half_width; }
};

struct RadialSegment {
    double angle = 0.0;
    double from_r = 0.0;
    double to_r = 1.0;  // 1 is allowed as a closure point but never sampled
};

enum class PieceKind { Disc, Arc, Segment };

struct PieceRef {
    PieceKind kind;
    std::size_t index;  // into arcs / segments; 0 for the disc
};

// Central disc, arcs on the unit circle and radial segments. Piece order is
// disc (if any), then arcs, then segments.
struct CompactTarget {
    std::optional<double> disc_r;
    std::vector<Arc> arcs;
    std::vector<RadialSegment> segments;

    void validate() const;  // throws GeometryError
    std::vector<PieceRef> pieces() const;
    std::size_t piece_count() const { return pieces().size(); }
};

struct StolzAngle {
    cplx vertex;
    double opening;

    StolzAngle(cplx v, double alpha);
};

struct SampleGrid {
    std::vector<cplx> points;
    std::vector<std::size_t> piece_tags;
    double density = 0.0;
};

SampleGrid sample(const CompactTarget& K, double density);

// Distance from a point to a piece; used to check tags.
double distance_to_piece(const CompactTarget& K, const PieceRef& piece, cplx z);

double arc_measure(std::span<const Arc> arcs);
bool arcs_overlap(const Arc& a, const Arc& b);

double poisson_kernel(cplx z, cplx zeta);
double harmonic_majorant(cplx z, cplx zeta1, cplx zeta2, double c);
bool stolz_contains(const StolzAngle& S, cplx z);

double normalize_angle(double theta);  // to [0, 2pi)
double angular_distance(double a, double b);  // in [0, pi]

nlohmann::json target_to_json(const CompactTarget& K);
CompactTarget target_from_json(const nlohmann::json& j);

}  // namespace abelu
