#include "salesrf/tune.hpp"

#include <chrono>

#include <fmt/format.h>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"
#include "salesrf/metrics.hpp"

namespace salesrf {

std::size_t GridSpec::combinations() const noexcept {
    return n_trees.size() * max_depth.size() * min_samples_split.size() * min_samples_leaf.size() *
           max_features.size();
}

std::vector<ForestParams> GridSpec::expand() const {
    std::vector<ForestParams> combos;
    combos.reserve(combinations());
    for (const int trees : n_trees)
        for (const int depth : max_depth)
            for (const int split : min_samples_split)
                for (const int leaf : min_samples_leaf)
                    for (const double features : max_features) {
                        ForestParams p;
                        p.n_trees = trees;
                        p.max_depth = depth;
                        p.min_samples_split = split;
                        p.min_samples_leaf = leaf;
                        p.max_features = features;
                        p.bootstrap = bootstrap;
                        p.master_seed = master_seed;
                        combos.push_back(p);
                    }
    return combos;
}

std::string describe(const ForestParams& p) {
    return fmt::format("n_trees={} max_depth={} min_samples_split={} min_samples_leaf={} max_features={}",
                       p.n_trees, p.max_depth, p.min_samples_split, p.min_samples_leaf,
                       csv::format_double(p.max_features));
}

GridResult grid_search(const FeatureFrame& frame, const GridSpec& grid, int warmup, ClipRange clip,
                       unsigned threads) {
    if (grid.combinations() == 0) throw Error(ErrorKind::Config, "grid search: empty grid");
    GridResult result;
    result.valid_month = grid.valid_month >= 0 ? grid.valid_month : training_months(frame).last;
    const auto split = split_train_valid(frame, result.valid_month, warmup);
    if (split.train.rows() == 0)
        throw Error(ErrorKind::Data, fmt::format("grid search: no training rows before month {}", result.valid_month));
    std::vector<double> actual = split.valid.target;

    for (const auto& params : grid.expand()) {
        GridRow row;
        row.params = params;
        const auto start = std::chrono::steady_clock::now();
        try {
            const auto model = fit_forest(split.train, params, threads);
            row.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            row.rmse = score_predictions(predict(model, split.valid), actual, clip).rmse;
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("grid search combination ({}): {}", describe(params), e.what()));
        }
        // Strict comparison keeps the earliest of equal scores.
        if (result.table.empty() || row.rmse < result.best_rmse) {
            result.best_index = result.table.size();
            result.best_rmse = row.rmse;
            result.best = params;
        }
        result.table.push_back(row);
    }
    return result;
}

std::string grid_csv(const GridResult& result) {
    std::string out = "n_trees,max_depth,min_samples_split,min_samples_leaf,max_features,rmse\n";
    for (const auto& row : result.table) {
        const auto& p = row.params;
        out += fmt::format("{},{},{},{},{},{}\n", p.n_trees, p.max_depth, p.min_samples_split,
                           p.min_samples_leaf, csv::format_double(p.max_features), csv::format_double(row.rmse));
    }
    return out;
}

std::string grid_summary(const GridResult& result) {
    std::string out = fmt::format("grid search: {} combinations, validation month {}\n", result.table.size(),
                                  result.valid_month);
    for (std::size_t i = 0; i < result.table.size(); ++i) {
        const auto& row = result.table[i];
        out += fmt::format("{} {:<88} rmse {:.6f}  fit {:.2f}s\n", i == result.best_index ? '*' : ' ',
                           describe(row.params), row.rmse, row.fit_seconds);
    }
    out += fmt::format("best: {} (rmse {:.6f})\n", describe(result.best), result.best_rmse);
    return out;
}

}  // namespace salesrf
