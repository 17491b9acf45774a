#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "koopman/coherency.hpp"
#include "koopman/kmd.hpp"
#include "koopman/mor.hpp"
#include "koopman/stability.hpp"

namespace koopman {

/// Serializes with every floating-point number at 17 significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const KoopmanDecomposition& d);
nlohmann::json to_json(const ModeSummary& s);
nlohmann::json to_json(const CoherentGroup& g);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const DensityGrid& g);
nlohmann::json to_json(const ReducedModel& r);

}  // namespace koopman
