#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salesrf/featurize.hpp"
#include "salesrf/forest.hpp"

namespace salesrf {

/// Candidate lists per hyperparameter. Combinations are enumerated in the
/// declared order below with the last list varying fastest.
struct GridSpec {
    std::vector<int> n_trees{100};
    std::vector<int> max_depth{8, 12, 16};
    std::vector<int> min_samples_split{10};
    std::vector<int> min_samples_leaf{5};
    std::vector<double> max_features{1.0 / 3.0, 0.5};
    bool bootstrap = true;
    MonthIndex valid_month = -1;  // -1: last training month
    std::uint64_t master_seed = 42;

    std::size_t combinations() const noexcept;
    std::vector<ForestParams> expand() const;
};

struct GridRow {
    ForestParams params;
    double rmse = 0.0;
    double fit_seconds = 0.0;
};

struct GridResult {
    std::vector<GridRow> table;
    std::size_t best_index = 0;
    ForestParams best;
    double best_rmse = 0.0;
    MonthIndex valid_month = 0;
};

std::string describe(const ForestParams& params);

/// Fits every combination on months [first + warmup, valid_month) and scores
/// the clipped predictions on valid_month. The first combination with the
/// minimum RMSE wins.
GridResult grid_search(const FeatureFrame& frame, const GridSpec& grid, int warmup,
                       ClipRange clip = {}, unsigned threads = 1);

/// One row per combination; fit times are left out so reruns compare equal.
std::string grid_csv(const GridResult& result);
std::string grid_summary(const GridResult& result);

}  // namespace salesrf
