#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salesrf/forest.hpp"

namespace salesrf {

/// k forests that differ only in seed. Member i is trained with master seed
/// derive_seed(seed, i); params.master_seed is ignored.
struct EnsembleSpec {
    int k = 5;
    std::uint64_t seed = 42;
    ForestParams params;

    void validate() const;
    std::vector<std::uint64_t> member_seeds() const;
};

std::vector<ForestModel> fit_mean_ensemble(const FeatureFrame& frame, const EnsembleSpec& spec,
                                           unsigned threads = 1);

/// Per-row mean of member predictions, computed as
///     min + sum(v - min) / k
/// over the sorted member values, so the result is exact for identical
/// members and independent of member order.
std::vector<double> predict_mean_ensemble(std::span<const ForestModel> models, const FeatureFrame& frame);

struct LinearFit {
    double intercept = 0.0;
    std::vector<double> weights;
};

/// Ordinary least squares of y on the columns plus an intercept, through the
/// normal equations. Empty when the normal matrix is numerically singular.
std::optional<LinearFit> solve_meta_weights(std::span<const std::vector<double>> columns,
                                            std::span<const double> y);

struct StackedModel {
    std::vector<ForestParams> base_specs;
    int folds = 3;
    LinearFit meta;
    std::vector<ForestModel> bases;  // refit on every stacking row
    /// Rows used for stacking, in frame order, with their fold and the
    /// out-of-fold prediction of every base (oof[base][row]).
    std::vector<std::size_t> rows;
    std::vector<int> fold_of_row;
    std::vector<std::vector<double>> oof;
    std::vector<std::string> warnings;
};

/// Stacks forests over target-bearing rows with month < valid_month. Rows are
/// split into `folds` contiguous blocks of months; the fold-f model of each
/// base sees every other fold only.
StackedModel fit_stacked(const FeatureFrame& frame, std::span<const ForestParams> base_specs,
                         int folds, MonthIndex valid_month, unsigned threads = 1);

std::vector<double> predict_stacked(const StackedModel& model, const FeatureFrame& frame);

/// A trained predictor as stored on disk: either a seed-averaged ensemble or
/// a stack. Single forests are stored as a one-member mean ensemble.
struct EnsembleArtifact {
    enum class Kind { Mean, Stacked } kind = Kind::Mean;
    std::vector<ForestModel> members;
    std::vector<std::uint64_t> member_seeds;
    LinearFit meta;  // stacked only
    int folds = 0;
    std::vector<std::string> warnings;

    std::vector<double> predict(const FeatureFrame& frame) const;
};

EnsembleArtifact mean_artifact(std::vector<ForestModel> members, std::vector<std::uint64_t> seeds);
EnsembleArtifact stacked_artifact(const StackedModel& model);

/// Writes member model files next to a JSON manifest.
void save_artifact(const EnsembleArtifact& artifact, const std::filesystem::path& manifest_path);
EnsembleArtifact load_artifact(const std::filesystem::path& manifest_path);

}  // namespace salesrf
