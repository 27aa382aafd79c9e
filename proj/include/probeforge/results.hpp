#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "probeforge/data.hpp"
#include "probeforge/trainer.hpp"

namespace probeforge {

// Every results document carries this tag in "schema_version".
inline constexpr std::string_view kResultsSchema = "pf-results/1";

nlohmann::json config_to_json(const TrainConfig& cfg);
nlohmann::json dataset_to_json(const Dataset& ds);
nlohmann::json run_to_json(const RunResult& r);
nlohmann::json delta_to_json(const DeltaPref& d);

// Complete documents, one per CLI command.
nlohmann::json run_document(const Dataset& ds, const RunResult& r, const DeltaResult* delta);
nlohmann::json sweep_document(const Dataset& ds, const TrainConfig& cfg,
                              const std::vector<RunResult>& runs);
nlohmann::json ablation_document(const Dataset& ds, const AblationResult& a);
nlohmann::json bucket_document(const Dataset& ds, const BucketRun& b);

/// Drops every "wall_clock_seconds" field, recursively.
nlohmann::json strip_wall_clock(nlohmann::json doc);

}  // namespace probeforge
