#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace salesrf {

using ShopId = std::int32_t;
using ItemId = std::int32_t;
using CategoryId = std::int32_t;
using MonthIndex = std::int32_t;

struct CalendarDate {
    std::int32_t year = 0;
    std::int32_t month = 1;  // 1..12
    std::int32_t day = 1;    // 1..31

    auto operator<=>(const CalendarDate&) const = default;
};

/// One row of the daily transaction log.
struct DailySaleRecord {
    CalendarDate date;
    MonthIndex month_index = 0;
    ShopId shop_id = 0;
    ItemId item_id = 0;
    double item_price = 0.0;
    double item_cnt_day = 0.0;  // negative for returns

    bool operator==(const DailySaleRecord&) const = default;
};

using DailySalesTable = std::vector<DailySaleRecord>;

struct Catalog {
    std::map<ItemId, CategoryId> items;
    std::set<ShopId> shops;
    std::set<CategoryId> categories;

    CategoryId category_of(ItemId item) const;
    bool operator==(const Catalog&) const = default;
};

struct TestRow {
    std::int64_t row_id = 0;
    ShopId shop_id = 0;
    ItemId item_id = 0;

    bool operator==(const TestRow&) const = default;
};

/// Pairs to forecast for the month after the last training month.
struct TestSet {
    std::vector<TestRow> rows;
    MonthIndex target_month = 0;

    bool operator==(const TestSet&) const = default;
};

}  // namespace salesrf
