#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abelu/geometry.hpp"
#include "abelu/numerics.hpp"

namespace abelu {

// Columnar data for CSV export.
struct Series {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
std::string to_csv(const Series& s);

// sum_{n=1}^{terms} z^(2^n)
Poly lacunary(int terms, long bits = kDefaultBits);

// ---- dilate density

struct DilateDensityReport {
    std::vector<double> radii;
    std::vector<double> errors;  // sup over the arc grid of |f(r z) - phi(z)|
    double best_r = 0.0;
    double best_error = 0.0;
    std::size_t points = 0;
    bool report_only = false;

    nlohmann::json to_json() const;
    Series series() const;
};

DilateDensityReport dilate_density_check(const Poly& f, std::span<const double> radii, const Arc& K, const Poly& phi,
                                         bool report_only = false, std::size_t points = 2048);

// ---- growth

struct GrowthReport {
    std::vector<double> r;
    std::vector<double> M;                  // raw circle-grid maximum
    std::vector<double> M_certified;        // times margin factor
    std::vector<std::optional<double>> M_A; // sup over A on |z| = r, if A meets that circle
    double hornblower_partial = 0.0;        // trapezoid of log+ log+ M over the grid
    std::size_t circle_points = 0;
    double margin_factor = 1.0;
    bool monotone = true;                   // M nondecreasing up to rounding
    std::string evaluator;

    nlohmann::json to_json() const;
    Series series() const;
};

GrowthReport growth_metrics(const Poly& f, std::span<const double> r_grid, const std::optional<CompactTarget>& A = {});

// ---- gaps

struct GapWitness {
    enum class Kind { Hadamard, HadamardOstrowski, Ostrowski };
    Kind kind = Kind::Hadamard;
    std::vector<long> support;                       // Hadamard
    std::vector<std::pair<long, long>> intervals;    // (p, q], HO and Ostrowski
    double ratio = 0.0;       // min successive ratio (Hadamard) or min q/p (HO); max q/p for Ostrowski
    double root_bound = 0.0;  // max |a_k|^(1/k) over the intervals

    nlohmann::json to_json() const;
};
std::string to_string(GapWitness::Kind k);

// Indices below k_min are ignored.
std::vector<GapWitness> gap_witnesses(const Poly& f, double theta = 0.9, double sigma = 1.1, long k_min = 1);

// ---- spherical derivative and Bloch norm

// Annular sector {r_min <= |z| <= r_max, |arg z - center| <= half_width}.
struct SectorRegion {
    double r_min = 0.0;
    double r_max = 0.99;
    double center = 0.0;
    double half_width = 3.141592653589793;  // full annulus
    void validate() const;
};

struct RadialGrid {
    std::size_t radial = 256;   // rings
    std::size_t angular = 256;  // minimum points per ring (raised to resolve the degree)
};

struct ScanReport {
    double value = 0.0;
    cplx argmax{0.0, 0.0};
    std::size_t rings = 0;
    std::size_t ring_points = 0;
    double r_cutoff = 0.0;    // rings beyond this radius are covered by tail_bound
    double tail_bound = 0.0;  // Bloch only: bound on the sup beyond r_cutoff
    std::string evaluator;

    nlohmann::json to_json() const;
};

ScanReport normality_scan(const Poly& f, const SectorRegion& region, const RadialGrid& grid = {});
ScanReport bloch_norm_estimate(const Poly& f, const RadialGrid& grid = {});

// ---- Picard coverage

struct ValueWindow {
    cplx center{0.0, 0.0};
    double half = 1.0;        // square [center - half, center + half]^2
    std::size_t cells = 64;   // cells per side
};

struct CoverageReport {
    cplx zeta;
    double r = 0.0;
    double spacing = 0.0;
    std::size_t domain_points = 0;
    ValueWindow window;
    double covered_fraction = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> missed;  // (column, row) cells

    nlohmann::json to_json() const;
};

// Domain samples are the lattice zeta + spacing * (i + j i) inside D(zeta, r) and the open disc.
CoverageReport picard_coverage(const Poly& f, cplx zeta, double r, const ValueWindow& window, double spacing);

// ---- radial cluster set

struct ClusterReport {
    cplx zeta;
    std::vector<double> r;
    std::vector<cplx> values;
    ValueWindow box;
    double delta = 0.0;
    double approached_fraction = 0.0;  // box grid points within delta of some value
    double covering_radius = 0.0;      // max over box grid points of the distance to the value set
    double tail_oscillation = 0.0;     // diameter of the values over the last decile of the r grid

    nlohmann::json to_json() const;
    Series series() const;
};

ClusterReport radial_cluster_sample(const Poly& f, cplx zeta, std::span<const double> r_grid, const ValueWindow& box,
                                    double delta);

// ---- two radii

struct TwoRadiiReport {
    double max_ratio = 0.0;
    double at_r = 0.0;
    int at_radius = 0;  // 1 or 2
    std::vector<double> r;
    std::vector<double> ratio1, ratio2;

    nlohmann::json to_json() const;
    Series series() const;
};

// max of |f(r zeta_i)| exp(-h(r zeta_i)) with h = c (P(., zeta1) + P(., zeta2))
TwoRadiiReport two_radii_bound_check(const Poly& f, cplx zeta1, cplx zeta2, double c, std::span<const double> r_grid);

// ---- partial sums

struct DivergenceProfile {
    std::vector<long> checkpoints;
    std::vector<double> min_ratio;                 // per point: min_k |S_k| / k
    std::vector<std::vector<double>> modulus;      // per point, per checkpoint: |S_k|
    std::vector<double> fraction_per_checkpoint;   // share of points with |S_k| >= k
    double fraction = 0.0;                         // share of points with min ratio >= 1

    nlohmann::json to_json() const;
    Series series() const;
};

std::vector<cplx> circle_grid(std::size_t n);
DivergenceProfile partial_sum_divergence_profile(const Poly& f, std::span<const cplx> points,
                                                 std::span<const long> checkpoints);

}  // namespace abelu
