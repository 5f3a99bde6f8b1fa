#pragma once

// Builders shared by config validation and the runner.

#include <optional>
#include <vector>

#include "abelu/approximation.hpp"
#include "abelu/capacity.hpp"
#include "abelu/constructors.hpp"
#include "abelu/diagnostics.hpp"
#include "abelu/runner.hpp"

namespace abelu::detail {

const nlohmann::json& block(const nlohmann::json& j, const char* key);
cplx point_from(const nlohmann::json& j);  // [re, im] or {"angle": t}
std::vector<cplx> points_from(const nlohmann::json& j);
// explicit list, or {"from", "to", "count"} (linear) or {"log_to_one": count, "from"} (1 - r log-spaced)
std::vector<double> grid_from(const nlohmann::json& j);

StagePolicy policy_from(const nlohmann::json& j);
TargetEnrollment enrollment_from(const nlohmann::json& j, long bits);
GrowthEnvelope envelope_from(const nlohmann::json& j);
ConstructionOptions construction_options_from(const nlohmann::json& j);

// "input" (path), "poly" (inline), or "lacunary" (term count)
Poly poly_source(const ExperimentConfig& cfg, const nlohmann::json& j);
Poly target_poly(const nlohmann::json& j, long bits);  // number, [re, im], {"constant"}, or polynomial JSON
std::vector<PieceTarget> pieces_from(const nlohmann::json& j, long bits);
ValueWindow window_from(const nlohmann::json& j);
PointCloud cloud_from(const nlohmann::json& j);
AnnulusRegion annulus_from(const nlohmann::json& j);

long bits_of(const ExperimentConfig& cfg);

}  // namespace abelu::detail
