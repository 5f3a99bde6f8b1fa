#pragma once

#include <span>
#include <string>
#include <vector>

#include "abelu/diagnostics.hpp"
#include "abelu/numerics.hpp"

namespace abelu {

struct PointCloud {
    std::vector<cplx> points;
    std::string provenance;

    void validate() const;  // nonempty, no duplicates

    static PointCloud disc(cplx center, double radius, double density);
    static PointCloud segment(cplx a, cplx b, double density);
    // rings r_in .. r_out, each sampled at the given linear density
    static PointCloud annulus(double r_in, double r_out, double density);
};

struct CapacityEstimate {
    double value = 0.0;                 // transfinite_diameter / m^(1/(m-1))
    double transfinite_diameter = 0.0;  // (prod_{i<j} |z_i - z_j|)^(2/(m(m-1)))
    std::size_t m = 0;                  // points actually selected
    std::size_t cloud_size = 0;
    std::string method = "leja";

    nlohmann::json to_json() const;
};

CapacityEstimate capacity_estimate(const PointCloud& cloud, std::size_t m = 48);

// Annulus r_in <= |z| <= r_out with r_in > 1, sampled at `density` points per unit length.
struct AnnulusRegion {
    double r_in = 1.2;
    double r_out = 1.5;
    double density = 40.0;
    void validate() const;
};

struct CurvePoint {
    long n = 0;
    CapacityEstimate estimate;
    std::size_t cloud_size = 0;  // grid points with |S_n| <= M
};

struct CapacityCurve {
    double M = 0.0;
    AnnulusRegion region;
    std::size_t grid_points = 0;
    std::vector<CurvePoint> points;

    nlohmann::json to_json() const;
    Series series() const;
};

CapacityCurve sublevel_capacity_curve(const Poly& f, const AnnulusRegion& K, double M, std::span<const long> checkpoints,
                                      std::size_t m = 48);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace abelu
