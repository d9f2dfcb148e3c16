#include "salesrf/featurize.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"
#include "salesrf/serialization.hpp"

namespace salesrf {

namespace {

struct CellKey {
    MonthIndex month;
    std::int64_t a;
    std::int64_t b;

    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        std::uint64_t h = static_cast<std::uint32_t>(k.month);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(k.a);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(k.b);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

enum class Grouping { Item, Shop, Category, ItemShop };

Grouping parse_grouping(const std::string& name) {
    if (name == "item") return Grouping::Item;
    if (name == "shop") return Grouping::Shop;
    if (name == "category") return Grouping::Category;
    if (name == "item_shop") return Grouping::ItemShop;
    throw Error(ErrorKind::Config,
                fmt::format("unknown grouping '{}'; expected item, shop, category or item_shop", name));
}

}  // namespace

void OutlierPolicy::validate() const {
    if (!(max_item_cnt_day > 0.0) || !(max_item_price > 0.0))
        throw Error(ErrorKind::Config, "outlier thresholds must be > 0");
}

void FeatureRecipe::validate() const {
    for (const int lag : target_lags) {
        if (lag < 1) throw Error(ErrorKind::Config, fmt::format("target lag {} must be >= 1", lag));
    }
    for (const auto& [name, lag] : group_mean_lags) {
        parse_grouping(name);
        if (lag < 1) throw Error(ErrorKind::Config, fmt::format("group-mean lag {} must be >= 1", lag));
    }
}

int FeatureRecipe::max_lag() const {
    int lag = include_price_lag1 ? 1 : 0;
    for (const int l : target_lags) lag = std::max(lag, l);
    for (const auto& [name, l] : group_mean_lags) lag = std::max(lag, l);
    return lag;
}

OutlierResult remove_outliers(const DailySalesTable& sales, const OutlierPolicy& policy) {
    policy.validate();
    OutlierResult result;
    result.sales.reserve(sales.size());
    for (const auto& r : sales) {
        const bool drop = r.item_cnt_day > policy.max_item_cnt_day ||
                          r.item_price > policy.max_item_price ||
                          (policy.drop_nonpositive_price && r.item_price <= 0.0);
        if (drop) {
            ++result.removed;
        } else {
            result.sales.push_back(r);
        }
    }
    return result;
}

MonthlyTable aggregate_monthly(const DailySalesTable& sales) {
    struct Acc {
        double count = 0.0;
        double price_sum = 0.0;
        std::size_t rows = 0;
    };
    std::map<std::tuple<MonthIndex, ShopId, ItemId>, Acc> groups;
    for (const auto& r : sales) {
        auto& acc = groups[{r.month_index, r.shop_id, r.item_id}];
        acc.count += r.item_cnt_day;
        acc.price_sum += r.item_price;
        ++acc.rows;
    }
    MonthlyTable table;
    table.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        const auto [m, s, i] = key;
        table.push_back({m, s, i, acc.count, acc.price_sum / static_cast<double>(acc.rows)});
    }
    return table;
}

MonthRange month_span(const MonthlyTable& monthly) {
    if (monthly.empty()) throw Error(ErrorKind::Data, "no monthly sales to build a matrix from");
    return {monthly.front().month_index, monthly.back().month_index};
}

FeatureFrame build_matrix(const MonthlyTable& monthly, MonthRange months) {
    if (months.first > months.last)
        throw Error(ErrorKind::Data, fmt::format("empty month range {}..{}", months.first, months.last));
    FeatureFrame frame;
    auto it = std::lower_bound(monthly.begin(), monthly.end(), months.first,
                               [](const MonthlyRecord& r, MonthIndex m) { return r.month_index < m; });
    for (MonthIndex m = months.first; m <= months.last; ++m) {
        const auto begin = it;
        while (it != monthly.end() && it->month_index == m) ++it;
        if (begin == it)
            throw Error(ErrorKind::Data, fmt::format("month {} has no transactions", m));

        std::set<ShopId> shops;
        std::set<ItemId> items;
        std::map<std::pair<ShopId, ItemId>, double> counts;
        for (auto r = begin; r != it; ++r) {
            shops.insert(r->shop_id);
            items.insert(r->item_id);
            counts.emplace(std::pair{r->shop_id, r->item_id}, r->item_cnt_month);
        }
        for (const auto s : shops) {
            for (const auto i : items) {
                const auto found = counts.find({s, i});
                frame.push_row(m, s, i, found == counts.end() ? 0.0 : found->second);
            }
        }
    }
    return frame;
}

FeatureFrame clip_target(const FeatureFrame& frame, ClipRange clip) {
    if (!(clip.lo < clip.hi))
        throw Error(ErrorKind::Config, fmt::format("clip interval [{}, {}] is empty", clip.lo, clip.hi));
    FeatureFrame out = frame;
    for (auto& t : out.target) {
        if (!std::isnan(t)) t = clip.apply(t);
    }
    return out;
}

MonthRange training_months(const FeatureFrame& frame) {
    MonthRange range{0, -1};
    bool any = false;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (!frame.has_target(r)) continue;
        if (!any) range = {frame.month[r], frame.month[r]};
        range.first = std::min(range.first, frame.month[r]);
        range.last = std::max(range.last, frame.month[r]);
        any = true;
    }
    if (!any) throw Error(ErrorKind::Data, "frame has no training rows");
    return range;
}

FeatureFrame append_test(const FeatureFrame& frame, const TestSet& test, const Catalog& catalog) {
    const auto months = training_months(frame);
    if (test.target_month != months.last + 1) {
        throw Error(ErrorKind::Data,
                    fmt::format("test target month {} must be one past the last training month {}",
                                test.target_month, months.last));
    }
    std::set<std::pair<ShopId, ItemId>> seen;
    FeatureFrame out = frame;
    for (const auto& row : test.rows) {
        if (!seen.insert({row.shop_id, row.item_id}).second) {
            throw Error(ErrorKind::Data, fmt::format("duplicate test pair (shop {}, item {})",
                                                     row.shop_id, row.item_id));
        }
        if (!catalog.items.empty() && !catalog.items.contains(row.item_id))
            throw Error(ErrorKind::Data, fmt::format("test item {} is not in the catalog", row.item_id));
        out.push_row(test.target_month, row.shop_id, row.item_id, kNoTarget, row.row_id);
    }
    return out;
}

FeatureFrame add_features(const FeatureFrame& frame, const MonthlyTable& monthly,
                          const Catalog& catalog, const FeatureRecipe& recipe) {
    recipe.validate();
    const auto n = frame.rows();
    const double fill = recipe.missing_lag_fill;

    std::vector<CategoryId> category(n, 0);
    const bool need_category =
        recipe.include_category_id ||
        std::any_of(recipe.group_mean_lags.begin(), recipe.group_mean_lags.end(),
                    [](const auto& g) { return g.first == "category"; });
    if (need_category) {
        for (std::size_t r = 0; r < n; ++r) category[r] = catalog.category_of(frame.item[r]);
    }

    auto group_key = [&](Grouping g, std::size_t r, MonthIndex m) {
        switch (g) {
            case Grouping::Item: return CellKey{m, frame.item[r], 0};
            case Grouping::Shop: return CellKey{m, frame.shop[r], 0};
            case Grouping::Category: return CellKey{m, category[r], 0};
            case Grouping::ItemShop: return CellKey{m, frame.shop[r], frame.item[r]};
        }
        return CellKey{m, 0, 0};
    };

    std::unordered_map<CellKey, double, CellKeyHash> cell_target;
    cell_target.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (frame.has_target(r)) cell_target.emplace(CellKey{frame.month[r], frame.shop[r], frame.item[r]}, frame.target[r]);
    }

    FeatureFrame out = frame;

    std::vector<int> lags = recipe.target_lags;
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    for (const int lag : lags) {
        std::vector<double> column(n, fill);
        for (std::size_t r = 0; r < n; ++r) {
            const auto found = cell_target.find({frame.month[r] - lag, frame.shop[r], frame.item[r]});
            if (found != cell_target.end()) column[r] = found->second;
        }
        out.add_feature(fmt::format("lag_{}", lag), std::move(column));
    }

    for (const auto& [name, lag] : recipe.group_mean_lags) {
        const Grouping g = parse_grouping(name);
        struct Mean {
            double sum = 0.0;
            std::size_t count = 0;
        };
        std::unordered_map<CellKey, Mean, CellKeyHash> means;
        for (std::size_t r = 0; r < n; ++r) {
            if (!frame.has_target(r)) continue;
            auto& acc = means[group_key(g, r, frame.month[r])];
            acc.sum += frame.target[r];
            ++acc.count;
        }
        std::vector<double> column(n, fill);
        for (std::size_t r = 0; r < n; ++r) {
            const auto found = means.find(group_key(g, r, frame.month[r] - lag));
            if (found != means.end()) column[r] = found->second.sum / static_cast<double>(found->second.count);
        }
        out.add_feature(fmt::format("{}_mean_lag_{}", name, lag), std::move(column));
    }

    if (recipe.include_price_lag1) {
        std::unordered_map<CellKey, double, CellKeyHash> price;
        price.reserve(monthly.size());
        for (const auto& m : monthly) price.emplace(CellKey{m.month_index, m.shop_id, m.item_id}, m.avg_item_price);
        std::vector<double> column(n, fill);
        for (std::size_t r = 0; r < n; ++r) {
            const auto found = price.find({frame.month[r] - 1, frame.shop[r], frame.item[r]});
            if (found != price.end()) column[r] = found->second;
        }
        out.add_feature("price_lag_1", std::move(column));
    }

    if (recipe.include_month_of_year) {
        std::vector<double> column(n);
        for (std::size_t r = 0; r < n; ++r) column[r] = static_cast<double>(frame.month[r] % 12);
        out.add_feature("month_of_year", std::move(column));
    }

    if (recipe.include_category_id) {
        std::vector<double> column(n);
        for (std::size_t r = 0; r < n; ++r) column[r] = static_cast<double>(category[r]);
        out.add_feature("category_id", std::move(column));
    }
    return out;
}

TrainValidSplit split_train_valid(const FeatureFrame& frame, MonthIndex valid_month, int warmup) {
    const auto months = training_months(frame);
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::size_t labelled = 0;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (!frame.has_target(r)) continue;
        ++labelled;
        const auto m = frame.month[r];
        if (m == valid_month) {
            valid.push_back(r);
        } else if (m < valid_month && m >= months.first + warmup) {
            train.push_back(r);
        }
    }
    if (valid.empty())
        throw Error(ErrorKind::Data, fmt::format("validation month {} has no training rows", valid_month));
    TrainValidSplit split;
    split.train = frame.select(train);
    split.valid = frame.select(valid);
    split.dropped = labelled - train.size() - valid.size();
    return split;
}

FeatureFrame training_rows(const FeatureFrame& frame, int warmup) {
    const auto months = training_months(frame);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (frame.has_target(r) && frame.month[r] >= months.first + warmup) rows.push_back(r);
    }
    return frame.select(rows);
}

FeatureFrame test_rows(const FeatureFrame& frame) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (!frame.has_target(r)) rows.push_back(r);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return frame.row_id[a] < frame.row_id[b]; });
    return frame.select(rows);
}

void save_frame(const FeatureFrame& frame, const FeatureRecipe& recipe,
                const std::filesystem::path& csv_path, const std::filesystem::path& schema_path) {
    frame.check();
    std::string out = "month_index,shop_id,item_id,row_id";
    for (const auto& name : frame.feature_names) out += "," + csv::quote(name);
    out += ",item_cnt_month\n";
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        out += fmt::format("{},{},{},", frame.month[r], frame.shop[r], frame.item[r]);
        if (frame.row_id[r] != kNoRowId) out += std::to_string(frame.row_id[r]);
        for (const auto& column : frame.features) {
            out.push_back(',');
            out += csv::format_double(column[r]);
        }
        out.push_back(',');
        if (frame.has_target(r)) out += csv::format_double(frame.target[r]);
        out.push_back('\n');
    }
    csv::write_text_file(csv_path, out);

    nlohmann::ordered_json schema;
    schema["format"] = "salesrf-frame";
    schema["version"] = 1;
    auto& columns = schema["columns"];
    for (const char* key : {"month_index", "shop_id", "item_id", "row_id"})
        columns.push_back({{"name", key}, {"role", "key"}});
    for (const auto& name : frame.feature_names) columns.push_back({{"name", name}, {"role", "feature"}});
    columns.push_back({{"name", "item_cnt_month"}, {"role", "target"}});
    schema["recipe"] = recipe_to_json(recipe);
    csv::write_text_file(schema_path, schema.dump(2) + "\n");
}

LoadedFrame load_frame(const std::filesystem::path& csv_path,
                       const std::filesystem::path& schema_path) {
    nlohmann::json schema;
    try {
        schema = nlohmann::json::parse(csv::read_text_file(schema_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, fmt::format("{}: {}", schema_path.string(), e.what()));
    }
    if (schema.value("format", "") != "salesrf-frame" || schema.value("version", 0) != 1)
        throw Error(ErrorKind::Version, fmt::format("{}: not a version 1 frame schema", schema_path.string()));

    LoadedFrame loaded;
    loaded.recipe = recipe_from_json(schema.at("recipe"));
    std::vector<std::string> expected;
    for (const auto& c : schema.at("columns")) {
        expected.push_back(c.at("name").get<std::string>());
        if (c.at("role") == "feature") loaded.frame.feature_names.push_back(expected.back());
    }

    csv::Reader reader(csv_path);
    if (reader.header() != expected)
        throw Error(ErrorKind::Schema, fmt::format("{}: header does not match schema {}",
                                                   csv_path.string(), schema_path.string()));
    auto& frame = loaded.frame;
    const std::size_t nf = frame.feature_names.size();
    frame.features.resize(nf);
    std::vector<std::string> f;
    while (reader.next(f)) {
        frame.month.push_back(static_cast<MonthIndex>(csv::parse_int(reader, f, 0)));
        frame.shop.push_back(static_cast<ShopId>(csv::parse_int(reader, f, 1)));
        frame.item.push_back(static_cast<ItemId>(csv::parse_int(reader, f, 2)));
        frame.row_id.push_back(f[3].empty() ? kNoRowId : csv::parse_int(reader, f, 3));
        for (std::size_t j = 0; j < nf; ++j) frame.features[j].push_back(csv::parse_double(reader, f, 4 + j));
        frame.target.push_back(f[4 + nf].empty() ? kNoTarget : csv::parse_double(reader, f, 4 + nf));
    }
    frame.check();
    return loaded;
}

}  // namespace salesrf
