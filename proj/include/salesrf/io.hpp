#pragma once

#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include "salesrf/types.hpp"

namespace salesrf {

// File layouts follow the public competition files:
//   sales:      date,date_block_num,shop_id,item_id,item_price,item_cnt_day
//   items:      item_name,item_id,item_category_id
//   shops:      shop_name,shop_id
//   categories: item_category_name,item_category_id
//   test:       ID,shop_id,item_id
//   submission: ID,item_cnt_month
// Dates are written day.month.year ("02.01.2013").

DailySalesTable load_sales_csv(const std::filesystem::path& path);
void save_sales_csv(const DailySalesTable& sales, const std::filesystem::path& path);

Catalog load_catalog(const std::filesystem::path& items_path,
                     const std::filesystem::path& shops_path,
                     const std::filesystem::path& categories_path);
void save_catalog(const Catalog& catalog, const std::filesystem::path& items_path,
                  const std::filesystem::path& shops_path,
                  const std::filesystem::path& categories_path);

/// Test pairs; the target month is supplied by the caller because the file
/// carries no month column.
TestSet load_test_csv(const std::filesystem::path& path, MonthIndex target_month);
void save_test_csv(const TestSet& test, const std::filesystem::path& path);

/// (ID, value) files: submissions and the synthetic truth.
std::vector<std::pair<std::int64_t, double>> load_id_values(const std::filesystem::path& path);
void save_id_values(const std::vector<std::pair<std::int64_t, double>>& rows,
                    const std::filesystem::path& path);

CalendarDate parse_date(std::string_view text);
std::string format_date(const CalendarDate& date);

}  // namespace salesrf
