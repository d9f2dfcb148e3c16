#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salesrf/frame.hpp"

namespace salesrf {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 12;          // 0 = a single leaf
    int min_samples_split = 10;
    int min_samples_leaf = 5;
    double max_features = 1.0 / 3.0;  // fraction of features drawn per node
    bool bootstrap = true;
    std::uint64_t master_seed = 42;

    void validate() const;
    /// ceil(max_features * n_features), at least one.
    std::size_t candidates_per_node(std::size_t n_features) const;

    bool operator==(const ForestParams&) const = default;
};

/// Column-major, non-owning view of dense feature data.
class FeatureView {
public:
    FeatureView() = default;
    explicit FeatureView(std::vector<std::span<const double>> columns);

    static FeatureView of(const FeatureFrame& frame);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t features() const noexcept { return columns_.size(); }
    double operator()(std::size_t row, std::size_t feature) const noexcept {
        return columns_[feature][row];
    }
    std::span<const double> column(std::size_t feature) const noexcept { return columns_[feature]; }

private:
    std::vector<std::span<const double>> columns_;
    std::size_t rows_ = 0;
};

struct SplitDecision {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity_reduction = 0.0;  // SSE(parent) - SSE(left) - SSE(right)
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

/// Reductions within this tolerance of each other count as ties, and a split
/// must beat zero by more than it. Depends only on the node's targets.
double split_tolerance(double node_sse, double node_sum_squares) noexcept;

/// Exhaustive search over midpoints between consecutive distinct values of
/// each candidate feature. Candidates are scanned in ascending index order,
/// thresholds ascending; a later candidate replaces the incumbent only when it
/// is better by more than split_tolerance. Returns nothing when no split has
/// positive reduction or every split violates min_samples_leaf.
std::optional<SplitDecision> best_split(const FeatureView& x, std::span<const double> y,
                                        std::span<const std::size_t> candidate_features,
                                        const ForestParams& params);

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // rows with value <= threshold go left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;         // leaf prediction

    bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // preorder, root at 0
    int depth = 0;

    double predict(const FeatureView& x, std::size_t row) const noexcept;
    /// Index of the leaf a row lands in.
    std::size_t leaf_of(const FeatureView& x, std::size_t row) const noexcept;

    bool operator==(const RegressionTree&) const = default;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    ForestParams params;
    std::vector<std::string> feature_names;
    /// Summed SSE reduction per feature over every split in every tree.
    std::vector<double> impurity_sums;

    bool operator==(const ForestModel&) const = default;
};

/// Grows one tree on every row of `frame`. All rows need targets.
RegressionTree fit_tree(const FeatureFrame& frame, const ForestParams& params,
                        std::uint64_t tree_seed);

/// Bootstrap draws for one tree: n indices in [0, n).
std::vector<std::uint32_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

/// Tree t uses seed derive_seed(params.master_seed, t); its bootstrap sample is
/// drawn from derive_seed(that seed, 1). Output does not depend on `threads`.
ForestModel fit_forest(const FeatureFrame& frame, const ForestParams& params,
                       unsigned threads = 1);

/// Arithmetic mean of tree outputs per row.
std::vector<double> predict(const ForestModel& model, const FeatureFrame& frame);

struct FeatureWeight {
    std::string name;
    double weight = 0.0;
};

/// Impurity sums normalized to total one, in feature order; all zeros when
/// the model has no split.
std::vector<FeatureWeight> feature_importance(const ForestModel& model);

/// Maps the model's features onto a frame's columns; throws naming the first
/// missing column.
FeatureView view_for_model(const std::vector<std::string>& feature_names, const FeatureFrame& frame);

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace salesrf
