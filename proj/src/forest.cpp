#include "salesrf/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "salesrf/error.hpp"
#include "salesrf/rng.hpp"

namespace salesrf {

namespace {

struct NodeStats {
    std::size_t n = 0;
    double mean = 0.0;
    double centered_total = 0.0;
    double sse = 0.0;
    double tolerance = 0.0;
};

template <typename TargetAt>
NodeStats node_stats(std::size_t n, TargetAt target_at) {
    NodeStats s;
    s.n = n;
    double sum = 0.0;
    double sum_squares = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double y = target_at(k);
        sum += y;
        sum_squares += y * y;
    }
    s.mean = sum / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = target_at(k) - s.mean;
        s.centered_total += d;
        s.sse += d * d;
    }
    s.tolerance = split_tolerance(s.sse, sum_squares);
    return s;
}

// Scans one feature whose n node samples are visited in ascending value order.
template <typename ValueAt, typename TargetAt>
void scan_feature(std::size_t n, ValueAt value_at, TargetAt target_at, std::size_t feature,
                  const NodeStats& node, std::size_t min_leaf, std::optional<SplitDecision>& best) {
    const double total = node.centered_total;
    const double dn = static_cast<double>(n);
    double left_sum = 0.0;
    double value = n > 0 ? value_at(0) : 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        left_sum += target_at(k) - node.mean;
        const double next = value_at(k + 1);
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_right < min_leaf) break;
        if (next == value || n_left < min_leaf) {
            value = next;
            continue;
        }
        const double dl = static_cast<double>(n_left);
        const double dr = static_cast<double>(n_right);
        const double diff = left_sum / dl - (total - left_sum) / dr;
        const double reduction = dl * dr / dn * diff * diff;
        if (reduction > node.tolerance &&
            (!best || reduction > best->impurity_reduction + node.tolerance)) {
            best = SplitDecision{feature, std::midpoint(value, next), reduction, n_left, n_right};
        }
        value = next;
    }
}

using Presort = std::vector<std::vector<std::uint32_t>>;

Presort presort_rows(const FeatureView& x) {
    Presort sorted(x.features());
    for (std::size_t f = 0; f < x.features(); ++f) {
        auto& order = sorted[f];
        order.resize(x.rows());
        std::iota(order.begin(), order.end(), 0u);
        const auto column = x.column(f);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
    }
    return sorted;
}

// Grows one tree over "slots": slot j is a training row (slot_rows[j]), with
// repeats under bootstrap. Per-feature slot orders are kept sorted by value
// and partitioned in place as the tree descends.
class TreeBuilder {
public:
    TreeBuilder(const FeatureView& x, std::span<const double> y,
                std::vector<std::uint32_t> slot_rows, const Presort& presort,
                const ForestParams& params, std::uint64_t seed)
        : x_(x), params_(params), rng_(seed), slot_rows_(std::move(slot_rows)) {
        const std::size_t n_slots = slot_rows_.size();
        slot_y_.resize(n_slots);
        for (std::size_t j = 0; j < n_slots; ++j) slot_y_[j] = y[slot_rows_[j]];

        // Slots of each row, ascending.
        std::vector<std::uint32_t> offset(x.rows() + 1, 0);
        for (const auto r : slot_rows_) ++offset[r + 1];
        for (std::size_t r = 0; r < x.rows(); ++r) offset[r + 1] += offset[r];
        std::vector<std::uint32_t> by_row(n_slots);
        {
            std::vector<std::uint32_t> cursor(offset.begin(), offset.end() - 1);
            for (std::uint32_t j = 0; j < n_slots; ++j) by_row[cursor[slot_rows_[j]]++] = j;
        }
        order_.resize(x.features());
        for (std::size_t f = 0; f < x.features(); ++f) {
            auto& order = order_[f];
            order.reserve(n_slots);
            for (const auto r : presort[f]) {
                for (auto k = offset[r]; k < offset[r + 1]; ++k) order.push_back(by_row[k]);
            }
        }
        goes_left_.resize(n_slots);
        scratch_.resize(n_slots);
        feature_pool_.resize(x.features());
        importance_.assign(x.features(), 0.0);
    }

    RegressionTree build() {
        if (slot_rows_.empty()) throw Error(ErrorKind::Data, "cannot fit a tree on zero rows");
        grow(0, slot_rows_.size(), 0);
        return std::move(tree_);
    }

    const std::vector<double>& importance() const { return importance_; }

private:
    std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
        const auto index = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.depth = std::max(tree_.depth, depth);

        const std::size_t n = end - begin;
        const auto* any_order = order_.empty() ? nullptr : order_[0].data() + begin;
        const auto target_of = [&](std::size_t k) {
            return any_order ? slot_y_[any_order[k]] : slot_y_[begin + k];
        };
        const NodeStats stats = node_stats(n, target_of);
        tree_.nodes[index].value = stats.mean;

        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        if (depth >= params_.max_depth || n < static_cast<std::size_t>(params_.min_samples_split) ||
            n < 2 * min_leaf || x_.features() == 0) {
            return index;
        }

        const std::size_t k = params_.candidates_per_node(x_.features());
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
        rng_.partial_shuffle(std::span<std::size_t>(feature_pool_), k);
        std::vector<std::size_t> candidates(feature_pool_.begin(), feature_pool_.begin() + k);
        std::sort(candidates.begin(), candidates.end());

        std::optional<SplitDecision> best;
        for (const auto f : candidates) {
            const auto* order = order_[f].data() + begin;
            const auto column = x_.column(f);
            scan_feature(
                n, [&](std::size_t i) { return column[slot_rows_[order[i]]]; },
                [&](std::size_t i) { return slot_y_[order[i]]; }, f, stats, min_leaf, best);
        }
        if (!best) return index;

        const auto column = x_.column(best->feature);
        for (std::size_t i = begin; i < end; ++i) {
            const auto slot = order_[0][i];
            goes_left_[slot] = column[slot_rows_[slot]] <= best->threshold;
        }
        // Leaves only read order_[0]; skip the other features when neither
        // child can split again.
        auto terminal = [&](std::size_t count) {
            return depth + 1 >= params_.max_depth ||
                   count < static_cast<std::size_t>(params_.min_samples_split) || count < 2 * min_leaf;
        };
        const bool both_terminal = terminal(best->left_count) && terminal(best->right_count);
        for (std::size_t f = 0; f < order_.size() && !(both_terminal && f > 0); ++f) {
            auto& order = order_[f];
            std::size_t left = begin;
            std::size_t right = 0;
            for (std::size_t i = begin; i < end; ++i) {
                const auto slot = order[i];
                if (goes_left_[slot]) {
                    order[left++] = slot;
                } else {
                    scratch_[right++] = slot;
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(right),
                      order.begin() + static_cast<std::ptrdiff_t>(left));
        }
        importance_[best->feature] += best->impurity_reduction;

        const std::size_t mid = begin + best->left_count;
        const auto left = grow(begin, mid, depth + 1);
        const auto right = grow(mid, end, depth + 1);
        auto& node = tree_.nodes[index];
        node.feature = static_cast<std::int32_t>(best->feature);
        node.threshold = best->threshold;
        node.left = left;
        node.right = right;
        node.value = 0.0;
        return index;
    }

    const FeatureView& x_;
    const ForestParams& params_;
    Rng rng_;
    std::vector<std::uint32_t> slot_rows_;
    std::vector<double> slot_y_;
    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<std::uint8_t> goes_left_;
    std::vector<std::uint32_t> scratch_;
    std::vector<std::size_t> feature_pool_;
    std::vector<double> importance_;
    RegressionTree tree_;
};

std::vector<double> frame_targets(const FeatureFrame& frame) {
    if (frame.rows() == 0) throw Error(ErrorKind::Data, "cannot fit on an empty frame");
    if (frame.rows() > UINT32_MAX) throw Error(ErrorKind::Data, "frame too large");
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (!frame.has_target(r))
            throw Error(ErrorKind::Data, fmt::format("row {} has no target; fit only on training rows", r));
    }
    return frame.target;
}

}  // namespace

void ForestParams::validate() const {
    if (n_trees < 1) throw Error(ErrorKind::Config, "n_trees must be >= 1");
    if (max_depth < 0) throw Error(ErrorKind::Config, "max_depth must be >= 0");
    if (min_samples_split < 2) throw Error(ErrorKind::Config, "min_samples_split must be >= 2");
    if (min_samples_leaf < 1) throw Error(ErrorKind::Config, "min_samples_leaf must be >= 1");
    if (!(max_features > 0.0 && max_features <= 1.0))
        throw Error(ErrorKind::Config, "max_features must lie in (0, 1]");
}

std::size_t ForestParams::candidates_per_node(std::size_t n_features) const {
    const double k = std::ceil(max_features * static_cast<double>(n_features) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 1.0)), 1, std::max<std::size_t>(n_features, 1));
}

FeatureView::FeatureView(std::vector<std::span<const double>> columns)
    : columns_(std::move(columns)) {
    rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (const auto& c : columns_) {
        if (c.size() != rows_) throw Error(ErrorKind::Data, "feature columns differ in length");
    }
}

FeatureView FeatureView::of(const FeatureFrame& frame) {
    std::vector<std::span<const double>> columns;
    for (const auto& c : frame.features) columns.emplace_back(c);
    FeatureView view(std::move(columns));
    view.rows_ = frame.rows();
    return view;
}

FeatureView view_for_model(const std::vector<std::string>& feature_names, const FeatureFrame& frame) {
    std::vector<std::span<const double>> columns;
    for (const auto& name : feature_names) columns.emplace_back(frame.features[frame.feature_index(name)]);
    FeatureView view(std::move(columns));
    return view;
}

double split_tolerance(double node_sse, double node_sum_squares) noexcept {
    return 1e-10 * node_sse + 1e-14 * node_sum_squares;
}

std::optional<SplitDecision> best_split(const FeatureView& x, std::span<const double> y,
                                        std::span<const std::size_t> candidate_features,
                                        const ForestParams& params) {
    const std::size_t n = y.size();
    std::optional<SplitDecision> best;
    if (n < 2 || n < static_cast<std::size_t>(params.min_samples_split)) return best;
    const NodeStats stats = node_stats(n, [&](std::size_t k) { return y[k]; });

    std::vector<std::size_t> features(candidate_features.begin(), candidate_features.end());
    std::sort(features.begin(), features.end());
    std::vector<std::uint32_t> order(n);
    for (const auto f : features) {
        const auto column = x.column(f);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
        scan_feature(
            n, [&](std::size_t k) { return column[order[k]]; },
            [&](std::size_t k) { return y[order[k]]; }, f, stats,
            static_cast<std::size_t>(params.min_samples_leaf), best);
    }
    return best;
}

double RegressionTree::predict(const FeatureView& x, std::size_t row) const noexcept {
    return nodes[leaf_of(x, row)].value;
}

std::size_t RegressionTree::leaf_of(const FeatureView& x, std::size_t row) const noexcept {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& node = nodes[i];
        i = static_cast<std::size_t>(x(row, static_cast<std::size_t>(node.feature)) <= node.threshold
                                         ? node.left
                                         : node.right);
    }
    return i;
}

RegressionTree fit_tree(const FeatureFrame& frame, const ForestParams& params,
                        std::uint64_t tree_seed) {
    params.validate();
    const auto y = frame_targets(frame);
    const auto x = FeatureView::of(frame);
    std::vector<std::uint32_t> slots(frame.rows());
    std::iota(slots.begin(), slots.end(), 0u);
    TreeBuilder builder(x, y, std::move(slots), presort_rows(x), params, tree_seed);
    return builder.build();
}

std::vector<std::uint32_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::uint32_t> draws(n);
    for (auto& d : draws) d = static_cast<std::uint32_t>(rng.below(n));
    return draws;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

ForestModel fit_forest(const FeatureFrame& frame, const ForestParams& params, unsigned threads) {
    params.validate();
    const auto y = frame_targets(frame);
    const auto x = FeatureView::of(frame);
    const Presort presort = presort_rows(x);
    const std::size_t n_trees = static_cast<std::size_t>(params.n_trees);

    ForestModel model;
    model.params = params;
    model.feature_names = frame.feature_names;
    model.trees.resize(n_trees);
    std::vector<std::vector<double>> importance(n_trees);

    parallel_for(n_trees, threads, [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(params.master_seed, t);
        std::vector<std::uint32_t> slots;
        if (params.bootstrap) {
            slots = bootstrap_indices(frame.rows(), derive_seed(tree_seed, 1));
        } else {
            slots.resize(frame.rows());
            std::iota(slots.begin(), slots.end(), 0u);
        }
        TreeBuilder builder(x, y, std::move(slots), presort, params, tree_seed);
        model.trees[t] = builder.build();
        importance[t] = builder.importance();
    });

    model.impurity_sums.assign(x.features(), 0.0);
    for (const auto& tree_importance : importance) {
        for (std::size_t f = 0; f < tree_importance.size(); ++f) model.impurity_sums[f] += tree_importance[f];
    }
    return model;
}

std::vector<double> predict(const ForestModel& model, const FeatureFrame& frame) {
    if (model.trees.empty()) throw Error(ErrorKind::Model, "model has no trees");
    const FeatureView x = view_for_model(model.feature_names, frame);
    std::vector<double> out(frame.rows(), 0.0);
    const auto n_trees = static_cast<double>(model.trees.size());
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        double sum = 0.0;
        for (const auto& tree : model.trees) sum += tree.predict(x, r);
        out[r] = sum / n_trees;
    }
    return out;
}

std::vector<FeatureWeight> feature_importance(const ForestModel& model) {
    std::vector<FeatureWeight> weights;
    double total = 0.0;
    for (const double v : model.impurity_sums) total += v;
    for (std::size_t f = 0; f < model.feature_names.size(); ++f) {
        const double raw = f < model.impurity_sums.size() ? model.impurity_sums[f] : 0.0;
        weights.push_back({model.feature_names[f], total > 0.0 ? raw / total : 0.0});
    }
    return weights;
}

}  // namespace salesrf
