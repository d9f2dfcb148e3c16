#include "salesrf/io.hpp"

#include <set>
#include <string>

#include <fmt/format.h>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"

namespace salesrf {

namespace {

constexpr const char* kSalesColumns =
    "date,date_block_num,shop_id,item_id,item_price,item_cnt_day";

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
}

std::int32_t to_id(const csv::Reader& reader, const std::vector<std::string>& fields,
                   std::size_t column) {
    const long long v = csv::parse_int(reader, fields, column);
    if (v < 0 || v > INT32_MAX) reader.fail(column, fmt::format("id out of range: {}", v));
    return static_cast<std::int32_t>(v);
}

}  // namespace

CategoryId Catalog::category_of(ItemId item) const {
    const auto it = items.find(item);
    if (it == items.end())
        throw Error(ErrorKind::Data, fmt::format("item {} is not in the catalog", item));
    return it->second;
}

CalendarDate parse_date(std::string_view text) {
    CalendarDate d;
    int parsed = 0;
    if (text.size() == 10 && text[2] == '.' && text[5] == '.') {
        auto digits = [&](std::size_t pos, std::size_t len, std::int32_t& out) {
            out = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (text[i] < '0' || text[i] > '9') return false;
                out = out * 10 + (text[i] - '0');
            }
            return true;
        };
        parsed = digits(0, 2, d.day) && digits(3, 2, d.month) && digits(6, 4, d.year);
    }
    if (!parsed || d.month < 1 || d.month > 12 || d.day < 1 ||
        d.day > days_in_month(d.year, d.month)) {
        throw Error(ErrorKind::Parse, fmt::format("invalid date '{}', expected dd.mm.yyyy", text));
    }
    return d;
}

std::string format_date(const CalendarDate& date) {
    return fmt::format("{:02}.{:02}.{:04}", date.day, date.month, date.year);
}

DailySalesTable load_sales_csv(const std::filesystem::path& path) {
    csv::Reader reader(path);
    const auto c_date = reader.column("date", kSalesColumns);
    const auto c_block = reader.column("date_block_num", kSalesColumns);
    const auto c_shop = reader.column("shop_id", kSalesColumns);
    const auto c_item = reader.column("item_id", kSalesColumns);
    const auto c_price = reader.column("item_price", kSalesColumns);
    const auto c_cnt = reader.column("item_cnt_day", kSalesColumns);

    DailySalesTable table;
    std::map<std::pair<int, int>, MonthIndex> month_of;
    std::vector<std::string> f;
    while (reader.next(f)) {
        DailySaleRecord r;
        try {
            r.date = parse_date(f[c_date]);
        } catch (const Error& e) {
            reader.fail(c_date, e.what());
        }
        const long long block = csv::parse_int(reader, f, c_block);
        if (block < 0) reader.fail(c_block, "month index must be >= 0");
        r.month_index = static_cast<MonthIndex>(block);
        r.shop_id = to_id(reader, f, c_shop);
        r.item_id = to_id(reader, f, c_item);
        r.item_price = csv::parse_double(reader, f, c_price);
        r.item_cnt_day = csv::parse_double(reader, f, c_cnt);

        const auto [it, inserted] = month_of.emplace(std::pair{r.date.year, r.date.month},
                                                     r.month_index);
        if (!inserted && it->second != r.month_index) {
            reader.fail(c_block, fmt::format("month index {} conflicts with {} used earlier for "
                                             "{:04}-{:02}",
                                             r.month_index, it->second, r.date.year,
                                             r.date.month));
        }
        table.push_back(r);
    }
    return table;
}

void save_sales_csv(const DailySalesTable& sales, const std::filesystem::path& path) {
    std::string out = std::string(kSalesColumns) + "\n";
    for (const auto& r : sales) {
        out += fmt::format("{},{},{},{},{},{}\n", format_date(r.date), r.month_index, r.shop_id,
                           r.item_id, csv::format_double(r.item_price),
                           csv::format_double(r.item_cnt_day));
    }
    csv::write_text_file(path, out);
}

Catalog load_catalog(const std::filesystem::path& items_path,
                     const std::filesystem::path& shops_path,
                     const std::filesystem::path& categories_path) {
    Catalog catalog;
    std::vector<std::string> f;

    {
        csv::Reader reader(categories_path);
        const auto c_id =
            reader.column("item_category_id", "item_category_name,item_category_id");
        while (reader.next(f)) {
            const auto id = to_id(reader, f, c_id);
            if (!catalog.categories.insert(id).second)
                reader.fail(c_id, fmt::format("duplicate category id {}", id));
        }
    }
    {
        csv::Reader reader(shops_path);
        const auto c_id = reader.column("shop_id", "shop_name,shop_id");
        while (reader.next(f)) {
            const auto id = to_id(reader, f, c_id);
            if (!catalog.shops.insert(id).second)
                reader.fail(c_id, fmt::format("duplicate shop id {}", id));
        }
    }
    {
        constexpr const char* kItemColumns = "item_name,item_id,item_category_id";
        csv::Reader reader(items_path);
        const auto c_id = reader.column("item_id", kItemColumns);
        const auto c_cat = reader.column("item_category_id", kItemColumns);
        while (reader.next(f)) {
            const auto id = to_id(reader, f, c_id);
            const auto cat = to_id(reader, f, c_cat);
            if (!catalog.categories.contains(cat)) {
                throw Error(ErrorKind::Data,
                            fmt::format("{}:{}: item {} references missing category {}",
                                        items_path.string(), reader.line_number(), id, cat));
            }
            if (!catalog.items.emplace(id, cat).second)
                reader.fail(c_id, fmt::format("duplicate item id {}", id));
        }
    }
    return catalog;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& items_path,
                  const std::filesystem::path& shops_path,
                  const std::filesystem::path& categories_path) {
    std::string items = "item_name,item_id,item_category_id\n";
    for (const auto& [item, cat] : catalog.items)
        items += fmt::format("item {},{},{}\n", item, item, cat);
    std::string shops = "shop_name,shop_id\n";
    for (const auto shop : catalog.shops) shops += fmt::format("shop {},{}\n", shop, shop);
    std::string cats = "item_category_name,item_category_id\n";
    for (const auto cat : catalog.categories) cats += fmt::format("category {},{}\n", cat, cat);
    csv::write_text_file(items_path, items);
    csv::write_text_file(shops_path, shops);
    csv::write_text_file(categories_path, cats);
}

TestSet load_test_csv(const std::filesystem::path& path, MonthIndex target_month) {
    constexpr const char* kColumns = "ID,shop_id,item_id";
    csv::Reader reader(path);
    const auto c_id = reader.column("ID", kColumns);
    const auto c_shop = reader.column("shop_id", kColumns);
    const auto c_item = reader.column("item_id", kColumns);
    TestSet test;
    test.target_month = target_month;
    std::vector<std::string> f;
    while (reader.next(f)) {
        TestRow row;
        row.row_id = csv::parse_int(reader, f, c_id);
        if (row.row_id != static_cast<std::int64_t>(test.rows.size())) {
            reader.fail(c_id, fmt::format("row ids must be contiguous from 0; expected {}",
                                          test.rows.size()));
        }
        row.shop_id = to_id(reader, f, c_shop);
        row.item_id = to_id(reader, f, c_item);
        test.rows.push_back(row);
    }
    return test;
}

void save_test_csv(const TestSet& test, const std::filesystem::path& path) {
    std::string out = "ID,shop_id,item_id\n";
    for (const auto& r : test.rows) out += fmt::format("{},{},{}\n", r.row_id, r.shop_id, r.item_id);
    csv::write_text_file(path, out);
}

std::vector<std::pair<std::int64_t, double>> load_id_values(const std::filesystem::path& path) {
    csv::Reader reader(path);
    if (reader.header().size() != 2 || reader.header()[0] != "ID") {
        throw Error(ErrorKind::Schema,
                    fmt::format("{}: unknown header layout; expected columns: ID,<value>",
                                path.string()));
    }
    std::vector<std::pair<std::int64_t, double>> rows;
    std::vector<std::string> f;
    while (reader.next(f)) rows.emplace_back(csv::parse_int(reader, f, 0), csv::parse_double(reader, f, 1));
    return rows;
}

void save_id_values(const std::vector<std::pair<std::int64_t, double>>& rows,
                    const std::filesystem::path& path) {
    std::string out = "ID,item_cnt_month\n";
    for (const auto& [id, v] : rows) out += fmt::format("{},{}\n", id, csv::format_double(v));
    csv::write_text_file(path, out);
}

}  // namespace salesrf
