#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salesrf/types.hpp"

namespace salesrf {

inline constexpr double kNoTarget = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::int64_t kNoRowId = -1;

/// Columnar (month, shop, item) matrix. Feature columns are dense and share
/// the key columns' length. Test rows carry a row id and no target (NaN).
struct FeatureFrame {
    std::vector<MonthIndex> month;
    std::vector<ShopId> shop;
    std::vector<ItemId> item;
    std::vector<std::int64_t> row_id;
    std::vector<double> target;
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> features;

    std::size_t rows() const noexcept { return month.size(); }
    std::size_t feature_count() const noexcept { return features.size(); }
    bool has_target(std::size_t row) const noexcept { return !std::isnan(target[row]); }

    void push_row(MonthIndex m, ShopId s, ItemId i, double target_value,
                  std::int64_t id = kNoRowId);

    /// Appends a named column. Throws on a duplicate name or length mismatch.
    void add_feature(std::string name, std::vector<double> column);

    /// Index of a feature column, or throws naming the missing column.
    std::size_t feature_index(std::string_view name) const;
    const std::vector<double>* find_feature(std::string_view name) const;

    /// Rows in the given order; feature columns are copied along.
    FeatureFrame select(std::span<const std::size_t> row_indices) const;

    /// Throws ErrorKind::Data when column lengths or names are inconsistent.
    void check() const;

    bool operator==(const FeatureFrame& other) const;
};

}  // namespace salesrf
