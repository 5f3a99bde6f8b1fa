#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abelu/approximation.hpp"
#include "abelu/geometry.hpp"
#include "abelu/numerics.hpp"

namespace abelu {

// eps_n for stages n = 1..N, radii r_j and R_j for j = 0, 1, ...
class StagePolicy {
public:
    static StagePolicy dyadic(int stages);  // eps_n = 2^(-n-2), r_n = 1 - 2^(-n-1), R_n = (r_{n-1} + r_n)/2
    static StagePolicy explicit_radii(int stages, std::vector<double> eps, std::vector<double> rho,
                                      std::vector<double> aux);
    // eps as dyadic, aux radii as geometric means of neighbours
    static StagePolicy from_rho(int stages, std::vector<double> rho);

    int stages() const { return stages_; }
    double eps(int n) const;          // n = 1..N
    double eps_tail(int n) const;     // sum_{i > n} eps_i
    double r(long j) const;           // r_j
    double R(long j) const;           // R_j, j >= 1
    long radius_count() const;        // number of stored radii, or -1 if generated
    bool is_dyadic() const { return dyadic_; }
    void validate() const;            // throws std::invalid_argument

    nlohmann::json to_json() const;
    static StagePolicy from_json(const nlohmann::json& j);

private:
    int stages_ = 0;
    bool dyadic_ = true;
    std::vector<double> eps_, rho_, aux_;
};

struct TargetEnrollment {
    std::vector<Poly> phis;
    std::vector<Arc> arcs;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;     // (phi index, arc index)
    std::vector<std::pair<std::size_t, std::size_t>> schedule;  // stage n -> (alpha(n), beta(n)), n = 1..

    bool empty() const { return pairs.empty(); }
    // pairs visited in order, repeating, for the given number of stages
    static TargetEnrollment round_robin(std::vector<Poly> phis, std::vector<Arc> arcs,
                                        std::vector<std::pair<std::size_t, std::size_t>> pairs, int stages);
    // one constant target per (phi, arc) pair
    static TargetEnrollment constants(std::vector<cplx> values, std::vector<Arc> arcs, int stages);
    void validate(int stages) const;
    std::optional<std::pair<std::size_t, std::size_t>> at_stage(int n) const;

    nlohmann::json to_json() const;
    static TargetEnrollment from_json(const nlohmann::json& j);
};

struct GrowthEnvelope {
    std::function<double(double)> w;
    std::string description;
    CompactTarget A;  // radial segments only; closure meets the circle at one point

    static GrowthEnvelope inverse_sqrt_radius();  // w(r) = (1-r)^(-1/2), A = [0, 1)
    void validate() const;
    cplx contact_point() const;
};

struct CoefficientFloor {
    SequenceSpec gamma;
};

struct LedgerEntry {
    long l = 0;
    cplx b;
    double candidate_count = 0.0;  // s_l (may exceed the range of integers)
    std::size_t hits = 0;          // grid points in G_l(b)
    double measure = 0.0;          // hits * 2 pi / grid
    double bound = 0.0;            // 2 pi / l^2
    std::size_t crossings = 0;     // boundary crossings of G_l(b) along the grid
    double slack = 0.0;            // crossings * 2 pi / grid
    std::string route;             // "measure" or "lem1"
};

struct DivergenceLedger {
    std::size_t grid = 0;
    std::vector<LedgerEntry> entries;
};

struct StageRecord {
    int n = 0;
    long u = 0;
    long v = -1;                   // growth construction only
    double radius = 0.0;           // r_n, or r_{v_n} for the growth construction
    double aux_radius = 0.0;       // R_n
    double eps = 0.0;
    long block_lo = 0;             // coefficient span of P_n + Q_n
    long block_hi = 0;
    long p_degree = -1;            // deg P_n, -1 if P_n = 0
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    ApproxCertificate certificate;
    nlohmann::json checks;         // stage-specific quantities
};

struct StageReport {
    std::string kind;
    bool completed = true;
    int failed_stage = 0;
    std::string failure;
    long bits = 0;
    std::vector<StageRecord> stages;
    nlohmann::json checks;         // whole-run checks
    nlohmann::json policy;
    nlohmann::json enrollment;

    nlohmann::json to_json() const;
};

struct ConstructionResult {
    Poly f;
    StageReport report;
    std::optional<DivergenceLedger> ledger;
};

nlohmann::json ledger_to_json(const DivergenceLedger& L);

struct ConstructionOptions {
    long max_degree = 512;          // per Mergelyan step
    std::size_t check_points = 2048;  // arc samples for the per-stage dilate checks
    std::function<void(const std::string&)> log;
};

ConstructionResult construct_growth_restricted(const GrowthEnvelope& env, const TargetEnrollment& enroll,
                                               const StagePolicy& policy, const ConstructionOptions& opts = {});

ConstructionResult construct_coefficient_floor(const CoefficientFloor& floor, const TargetEnrollment& enroll,
                                               const StagePolicy& policy, const ConstructionOptions& opts = {});

ConstructionResult construct_ae_divergent(const TargetEnrollment& enroll, const StagePolicy& policy,
                                          std::size_t circle_grid, const ConstructionOptions& opts = {});

ConstructionResult construct_pointwise_divergent(std::span<const cplx> E, const TargetEnrollment& enroll,
                                                 const StagePolicy& policy, const ConstructionOptions& opts = {});

// Annular candidate packing in the closed disc of radius l^4 with pairwise
// separation > 2l: annulus j has radius 4lj and m_j equally spaced points.
class CandidatePacking {
public:
    explicit CandidatePacking(long l);

    long l() const { return l_; }
    long annuli() const { return J_ + 1; }
    long count_on(long j) const;        // m_j
    cplx candidate(long j, long i) const;
    double total() const;               // s_l
    // index of the candidate within distance l of x, if any
    std::optional<std::pair<long, long>> lookup(cplx x) const;

private:
    long l_;
    long J_;
};

struct DivergenceChoice {
    cplx b;
    double candidate_count = 0.0;
    std::size_t hits = 0;
    double measure = 0.0;
    std::size_t crossings = 0;
};

// partial[j] is S_{l-1}-so-far + a_l w^l at w = exp(2 pi i j / G).
DivergenceChoice choose_divergence_coefficient(std::span<const CNum> partial, long l);
DivergenceChoice choose_divergence_coefficient(std::span<const cplx> partial, long l);

// |w_m + b z_m| >= R for all m with b = 2kR, k = 0..l.
CNum lem1_shift(std::span<const CNum> w, std::span<const CNum> z, double R);
cplx lem1_shift(std::span<const cplx> w, std::span<const cplx> z, double R);

}  // namespace abelu
