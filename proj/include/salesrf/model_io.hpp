#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "salesrf/forest.hpp"

namespace salesrf {

/// Current forest model file version (line 1: "salesrf-forest <version>").
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const ForestModel& model);
ForestModel deserialize_model(std::string_view text, std::string_view source = "<memory>");

void save_model(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_model(const std::filesystem::path& path);

}  // namespace salesrf
