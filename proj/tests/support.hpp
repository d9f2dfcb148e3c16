#pragma once

// Test-only helpers and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <unistd.h>
#include <vector>

#include "salesrf/frame.hpp"
#include "salesrf/types.hpp"

namespace testing_support {

using namespace salesrf;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("salesrf_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Frame of training rows (month 0) with columns named x0, x1, ...
inline FeatureFrame make_frame(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
    FeatureFrame f;
    for (std::size_t r = 0; r < y.size(); ++r) f.push_row(0, 0, static_cast<ItemId>(r), y[r]);
    for (std::size_t c = 0; c < columns.size(); ++c) f.add_feature("x" + std::to_string(c), columns[c]);
    return f;
}

struct RandomDataset {
    std::vector<std::vector<double>> columns;
    std::vector<double> y;
};

/// Small dataset mixing continuous and coarse (tie-heavy) columns.
inline RandomDataset random_dataset(std::mt19937_64& gen, std::size_t n, std::size_t n_features) {
    RandomDataset d;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> small(0, 4);
    d.columns.assign(n_features, std::vector<double>(n));
    for (std::size_t f = 0; f < n_features; ++f) {
        const bool coarse = gen() % 2 == 0;
        for (auto& v : d.columns[f]) v = coarse ? small(gen) : unit(gen);
    }
    const bool integer_targets = gen() % 2 == 0;
    d.y.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double signal = 3.0 * d.columns[0][r] + (n_features > 1 ? d.columns[n_features - 1][r] : 0.0);
        d.y[r] = integer_targets ? std::round(signal + 2.0 * unit(gen)) : signal + unit(gen);
    }
    return d;
}

inline double two_pass_sse(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double sse = 0.0;
    for (double x : v) sse += (x - mean) * (x - mean);
    return sse;
}

struct OracleSplit {
    std::size_t feature;
    double threshold;
    double reduction;
    std::size_t left;
    std::size_t right;
};

/// Exhaustive split search by explicit partition and direct SSE evaluation.
/// Tie rule: scan features then thresholds ascending; a later candidate wins
/// only when it beats the incumbent by more than the node tolerance
/// 1e-10*SSE + 1e-14*sum(y^2); zero must be beaten by the same margin.
inline std::optional<OracleSplit> exhaustive_split(const std::vector<std::vector<double>>& columns,
                                                   const std::vector<double>& y,
                                                   const std::vector<std::size_t>& rows,
                                                   std::vector<std::size_t> candidates,
                                                   std::size_t min_leaf, std::size_t min_split) {
    std::optional<OracleSplit> best;
    if (rows.size() < min_split || rows.size() < 2) return best;
    std::vector<double> node_y;
    double sum_squares = 0.0;
    for (auto r : rows) {
        node_y.push_back(y[r]);
        sum_squares += y[r] * y[r];
    }
    const double parent = two_pass_sse(node_y);
    const double tol = 1e-10 * parent + 1e-14 * sum_squares;
    std::sort(candidates.begin(), candidates.end());
    for (auto f : candidates) {
        std::vector<double> values;
        for (auto r : rows) values.push_back(columns[f][r]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t k = 0; k + 1 < values.size(); ++k) {
            const double threshold = (values[k] + values[k + 1]) / 2.0;
            std::vector<double> left;
            std::vector<double> right;
            for (auto r : rows) (columns[f][r] <= threshold ? left : right).push_back(y[r]);
            if (left.size() < min_leaf || right.size() < min_leaf) continue;
            const double reduction = parent - two_pass_sse(left) - two_pass_sse(right);
            if (reduction > tol && (!best || reduction > best->reduction + tol))
                best = OracleSplit{f, threshold, reduction, left.size(), right.size()};
        }
    }
    return best;
}

/// Greedy tree grown with the exhaustive oracle over all features. Records
/// the SSE reduction of every split per feature.
struct OracleTree {
    std::vector<double> reduction_by_feature;
    std::size_t splits = 0;
};

inline void grow_oracle(const std::vector<std::vector<double>>& columns, const std::vector<double>& y,
                        const std::vector<std::size_t>& rows, int depth, int max_depth, std::size_t min_leaf,
                        std::size_t min_split, OracleTree& out) {
    if (depth >= max_depth || rows.size() < 2 * min_leaf) return;
    std::vector<std::size_t> all(columns.size());
    for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
    const auto split = exhaustive_split(columns, y, rows, all, min_leaf, min_split);
    if (!split) return;
    out.reduction_by_feature[split->feature] += split->reduction;
    ++out.splits;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (columns[split->feature][r] <= split->threshold ? left : right).push_back(r);
    grow_oracle(columns, y, left, depth + 1, max_depth, min_leaf, min_split, out);
    grow_oracle(columns, y, right, depth + 1, max_depth, min_leaf, min_split, out);
}

/// Group sums by sorting a copy and summing runs.
inline std::vector<std::tuple<MonthIndex, ShopId, ItemId, double>> brute_group_sum(DailySalesTable rows) {
    std::sort(rows.begin(), rows.end(), [](const DailySaleRecord& a, const DailySaleRecord& b) {
        return std::tie(a.month_index, a.shop_id, a.item_id) < std::tie(b.month_index, b.shop_id, b.item_id);
    });
    std::vector<std::tuple<MonthIndex, ShopId, ItemId, double>> out;
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < rows.size() && rows[j].month_index == rows[i].month_index && rows[j].shop_id == rows[i].shop_id &&
               rows[j].item_id == rows[i].item_id) {
            sum += rows[j].item_cnt_day;
            ++j;
        }
        out.emplace_back(rows[i].month_index, rows[i].shop_id, rows[i].item_id, sum);
        i = j;
    }
    return out;
}

/// Sum over months of |active shops| * |active items| from raw daily rows.
inline std::size_t brute_matrix_rows(const DailySalesTable& rows) {
    std::map<MonthIndex, std::pair<std::vector<ShopId>, std::vector<ItemId>>> active;
    for (const auto& r : rows) {
        auto& [shops, items] = active[r.month_index];
        if (std::find(shops.begin(), shops.end(), r.shop_id) == shops.end()) shops.push_back(r.shop_id);
        if (std::find(items.begin(), items.end(), r.item_id) == items.end()) items.push_back(r.item_id);
    }
    std::size_t total = 0;
    for (const auto& [m, sets] : active) total += sets.first.size() * sets.second.size();
    return total;
}

inline DailySalesTable random_daily_rows(std::mt19937_64& gen, std::size_t n) {
    DailySalesTable rows;
    std::uniform_int_distribution<int> month(0, 5);
    std::uniform_int_distribution<int> shop(0, 9);
    std::uniform_int_distribution<int> item(0, 49);
    std::uniform_int_distribution<int> count(-2, 6);
    for (std::size_t i = 0; i < n; ++i) {
        DailySaleRecord r;
        r.month_index = month(gen);
        r.date = CalendarDate{2013, r.month_index + 1, 1 + static_cast<int>(gen() % 28)};
        r.shop_id = shop(gen);
        r.item_id = item(gen);
        r.item_price = 1.0 + static_cast<double>(gen() % 1000);
        r.item_cnt_day = count(gen);
        rows.push_back(r);
    }
    return rows;
}

inline double direct_rmse(const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) s += (static_cast<long double>(a[i]) - b[i]) * (static_cast<long double>(a[i]) - b[i]);
    return static_cast<double>(std::sqrt(s / static_cast<long double>(a.size())));
}

inline double direct_r_squared(const std::vector<double>& pred, const std::vector<double>& actual) {
    long double mean = 0.0L;
    for (double v : actual) mean += v;
    mean /= static_cast<long double>(actual.size());
    long double sse = 0.0L;
    long double sst = 0.0L;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sse += (static_cast<long double>(pred[i]) - actual[i]) * (static_cast<long double>(pred[i]) - actual[i]);
        sst += (actual[i] - mean) * (actual[i] - mean);
    }
    return static_cast<double>(1.0L - sse / sst);
}

}  // namespace testing_support
