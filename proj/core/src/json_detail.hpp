#pragma once

#include <json.hpp>

#include "stablab/market.hpp"

namespace stablab::detail {

ScenarioTree tree_from_json(const nlohmann::json& j);

}  // namespace stablab::detail
