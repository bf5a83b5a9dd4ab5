#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sderates/bump.hpp"
#include "sderates/distribution.hpp"
#include "sderates/functional.hpp"
#include "sderates/sde.hpp"

namespace sderates::registry {

struct Entry {
  std::string kind;  // "model" | "distribution" | "functional" | "bump"
  std::string name;
  std::string description;
};

// Stable-sorted catalog of the built-in names.
std::vector<Entry> catalog();

// Built-in SDE models: "gbm", "additive", "tanh_bounded".
// Overrides may set x0 and horizon.
sde::SdeSpec model_by_name(const std::string& name,
                           const nlohmann::json& overrides = nlohmann::json::object());

// Analytic terminal laws: "uniform01", "stdnormal", "lognormal_gbm_T1",
// "lognormal_standard".
dist::DistributionModel distribution_by_name(const std::string& name);

// Functional templates: "indicator" (params: K, shape), "staircase3",
// "arctan", "poly_square" (params: bump), "identity".
func::FunctionalRep functional_by_name(const std::string& name,
                                       const nlohmann::json& params = nlohmann::json::object());

bump::BumpFunction bump_by_name(const std::string& name,
                                const nlohmann::json& params = nlohmann::json::object());

}  // namespace sderates::registry
