#pragma once

// JSON forms of the toolkit's result types. Key names are part of the
// external interface.

#include <json.hpp>

#include "fcl/calibrate.hpp"
#include "fcl/losses.hpp"
#include "fcl/metrics.hpp"
#include "fcl/theory.hpp"
#include "fcl/train.hpp"

namespace fcl {

void to_json(nlohmann::json& j, const LossSpec& spec);
void from_json(const nlohmann::json& j, LossSpec& spec);

void to_json(nlohmann::json& j, const BinSummary& bin);
void to_json(nlohmann::json& j, const MetricReport& report);
void to_json(nlohmann::json& j, const SmceResult& result);

void to_json(nlohmann::json& j, const TemperatureScanResult& result);
void to_json(nlohmann::json& j, const PGapResult& result);
void to_json(nlohmann::json& j, const MinimizerResult& result);

void to_json(nlohmann::json& j, const MLPConfig& cfg);
void from_json(const nlohmann::json& j, MLPConfig& cfg);
void to_json(nlohmann::json& j, const ModelState& model);
void from_json(const nlohmann::json& j, ModelState& model);

}  // namespace fcl
