#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "salesrf/ensemble.hpp"
#include "salesrf/featurize.hpp"
#include "salesrf/forest.hpp"
#include "salesrf/synth.hpp"
#include "salesrf/tune.hpp"

namespace salesrf {

struct RunPaths {
    std::filesystem::path data_dir = "data";
    std::filesystem::path output_dir = "out";
    // Empty entries resolve to the standard file names inside data_dir.
    std::filesystem::path sales;
    std::filesystem::path items;
    std::filesystem::path shops;
    std::filesystem::path categories;
    std::filesystem::path test;
    std::filesystem::path truth;

    std::filesystem::path sales_file() const;
    std::filesystem::path items_file() const;
    std::filesystem::path shops_file() const;
    std::filesystem::path categories_file() const;
    std::filesystem::path test_file() const;
    std::filesystem::path truth_file() const;
};

struct StackConfig {
    int folds = 3;
    std::vector<ForestParams> bases;  // empty: three seeds of the forest params
};

/// Everything a pipeline run needs. Each section is optional in the config
/// file; absent sections keep the defaults shown in the struct definitions.
struct RunConfig {
    RunPaths paths;
    SynthConfig synth;
    OutlierPolicy outliers;
    FeatureRecipe recipe;
    ForestParams forest;
    EnsembleSpec ensemble;
    StackConfig stack;
    GridSpec grid;
    ClipRange clip;
    MonthIndex valid_month = -1;  // -1: last training month

    /// Rebases every seed on `seed`: synthetic noise, forest, ensemble,
    /// grid, and derive_seed(seed, b) for stacking base b.
    void apply_seed(std::uint64_t seed);
    /// Stacking bases after defaults are filled in.
    std::vector<ForestParams> stack_bases() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::string_view json_text, std::string_view source = "<config>");

}  // namespace salesrf
