#pragma once

#include "fgs/energy.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace fgs {

// Builds an energy model from its JSON description:
//
//   {"type": "log_quadratic", "beta": 0.42, "J": {"cycle": 5} | [[...], ...],
//    "b": [...], "embeddings": [[-1], [1]], "labels": ["-1", "+1"]}
//   {"type": "composite", "terms": [{"weight": 1.0, "model": {...}}, ...]}
//
// "b", "embeddings" and "labels" are optional (zero field, binary spins).
// Unknown keys are rejected with ConfigError.
std::shared_ptr<const EnergyModel> model_from_json(const nlohmann::json& doc);

std::shared_ptr<const EnergyModel> load_model(const std::string& path);

}  // namespace fgs
