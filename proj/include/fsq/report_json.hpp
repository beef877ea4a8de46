#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fsq/asymptotics.hpp"
#include "fsq/depth.hpp"
#include "fsq/efficiency.hpp"
#include "fsq/quantile.hpp"

namespace fsq {

using Json = nlohmann::ordered_json;

/// Library version, generator name and (when stochastic) the seed.
Json run_metadata(std::optional<std::uint64_t> seed);

Json to_json(const EfficiencyReport& report);
Json to_json(const std::vector<EfficiencyRow>& table);
Json to_json(const RateReport& report);
Json to_json(const BahadurStudy& study);
Json to_json(const QuantileSolution& solution);
Json to_json(const DDPlotData& data);
Json error_json(const std::string& kind, const std::string& message);

}  // namespace fsq
