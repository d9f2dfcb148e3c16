#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "salesrf/frame.hpp"
#include "salesrf/types.hpp"

namespace salesrf {

struct OutlierPolicy {
    double max_item_cnt_day = 1000.0;
    double max_item_price = 100000.0;
    bool drop_nonpositive_price = true;

    void validate() const;
};

struct OutlierResult {
    DailySalesTable sales;
    std::size_t removed = 0;
};

struct MonthlyRecord {
    MonthIndex month_index = 0;
    ShopId shop_id = 0;
    ItemId item_id = 0;
    double item_cnt_month = 0.0;
    double avg_item_price = 0.0;

    bool operator==(const MonthlyRecord&) const = default;
};

/// Sorted by (month, shop, item); one row per key.
using MonthlyTable = std::vector<MonthlyRecord>;

struct MonthRange {
    MonthIndex first = 0;
    MonthIndex last = 0;  // inclusive
};

struct ClipRange {
    double lo = 0.0;
    double hi = 20.0;

    double apply(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
};

/// Feature definition. Groupings are "item", "shop", "category" and
/// "item_shop"; any other name is rejected by add_features.
struct FeatureRecipe {
    std::vector<int> target_lags{1, 2, 3, 6, 12};
    std::vector<std::pair<std::string, int>> group_mean_lags{{"item", 1}, {"shop", 1}, {"category", 1}};
    bool include_price_lag1 = true;
    bool include_month_of_year = true;
    bool include_category_id = true;
    double missing_lag_fill = 0.0;

    void validate() const;
    /// Largest lag the recipe reads; the warm-up length for training rows.
    int max_lag() const;
};

OutlierResult remove_outliers(const DailySalesTable& sales, const OutlierPolicy& policy);

MonthlyTable aggregate_monthly(const DailySalesTable& sales);

/// Per-month Cartesian product of active shops and active items, with the
/// monthly count merged in as the (unclipped) target.
FeatureFrame build_matrix(const MonthlyTable& monthly, MonthRange months);

/// Month span covered by a monthly table. Throws on an empty table.
MonthRange month_span(const MonthlyTable& monthly);

FeatureFrame clip_target(const FeatureFrame& frame, ClipRange clip);

FeatureFrame append_test(const FeatureFrame& frame, const TestSet& test, const Catalog& catalog);

FeatureFrame add_features(const FeatureFrame& frame, const MonthlyTable& monthly,
                          const Catalog& catalog, const FeatureRecipe& recipe);

struct TrainValidSplit {
    FeatureFrame train;
    FeatureFrame valid;
    std::size_t dropped = 0;
};

/// Time-ordered holdout over rows that carry a target. Training keeps months
/// in [first_month + warmup, valid_month); validation is exactly valid_month.
TrainValidSplit split_train_valid(const FeatureFrame& frame, MonthIndex valid_month, int warmup);

/// Every target-bearing row at or after first_month + warmup.
FeatureFrame training_rows(const FeatureFrame& frame, int warmup);

/// Rows without a target, ordered by row id.
FeatureFrame test_rows(const FeatureFrame& frame);

/// First and last month among target-bearing rows.
MonthRange training_months(const FeatureFrame& frame);

// Frame persistence: a CSV with one column per key, feature and the target,
// and a JSON sidecar naming each column's role plus the recipe.
void save_frame(const FeatureFrame& frame, const FeatureRecipe& recipe,
                const std::filesystem::path& csv_path, const std::filesystem::path& schema_path);

struct LoadedFrame {
    FeatureFrame frame;
    FeatureRecipe recipe;
};

LoadedFrame load_frame(const std::filesystem::path& csv_path,
                       const std::filesystem::path& schema_path);

}  // namespace salesrf
