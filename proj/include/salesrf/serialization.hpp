#pragma once

#include <json.hpp>

#include "salesrf/ensemble.hpp"
#include "salesrf/featurize.hpp"
#include "salesrf/forest.hpp"
#include "salesrf/synth.hpp"
#include "salesrf/tune.hpp"

namespace salesrf {

// JSON forms of the configurable structs. Readers start from the struct's
// defaults, override the keys present and reject unknown keys.

nlohmann::ordered_json recipe_to_json(const FeatureRecipe& recipe);
FeatureRecipe recipe_from_json(const nlohmann::json& j);

nlohmann::ordered_json params_to_json(const ForestParams& params);
ForestParams params_from_json(const nlohmann::json& j, ForestParams base = {});

OutlierPolicy outliers_from_json(const nlohmann::json& j);
SynthConfig synth_from_json(const nlohmann::json& j);
GridSpec grid_from_json(const nlohmann::json& j);
ClipRange clip_from_json(const nlohmann::json& j);

}  // namespace salesrf
