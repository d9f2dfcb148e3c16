#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "salesrf/error.hpp"
#include "salesrf/featurize.hpp"
#include "salesrf/synth.hpp"
#include "support.hpp"

using namespace salesrf;
using testing_support::TempDir;

namespace {

DailySaleRecord sale(MonthIndex m, ShopId s, ItemId i, double cnt, double price = 10.0) {
    return DailySaleRecord{CalendarDate{2013, m % 12 + 1, 5}, m, s, i, price, cnt};
}

Catalog catalog_for(std::initializer_list<std::pair<ItemId, CategoryId>> items) {
    Catalog c;
    for (auto [i, cat] : items) {
        c.items[i] = cat;
        c.categories.insert(cat);
    }
    return c;
}

}  // namespace

TEST_CASE("remove_outliers drops rows past the thresholds") {
    const DailySalesTable sales{sale(0, 1, 1, 5.0, 10.0), sale(0, 1, 2, 2000.0, 10.0), sale(0, 1, 3, 1.0, 200000.0),
                                sale(0, 1, 4, 1.0, -1.0), sale(0, 1, 5, 1000.0, 100000.0)};
    const auto result = remove_outliers(sales, OutlierPolicy{});
    CHECK(result.removed == 3);
    REQUIRE(result.sales.size() == 2);
    CHECK(result.sales[0].item_id == 1);
    CHECK(result.sales[1].item_id == 5);

    OutlierPolicy keep_negative;
    keep_negative.drop_nonpositive_price = false;
    CHECK(remove_outliers(sales, keep_negative).removed == 2);
}

TEST_CASE("aggregate_monthly sums counts and averages prices") {
    const DailySalesTable sales{sale(0, 1, 1, 2.0, 10.0), sale(0, 1, 1, 4.0, 20.0), sale(0, 1, 1, -1.0, 30.0),
                                sale(1, 1, 1, 1.0, 5.0), sale(0, 2, 1, 3.0, 8.0)};
    const auto monthly = aggregate_monthly(sales);
    REQUIRE(monthly.size() == 3);
    CHECK(monthly[0] == MonthlyRecord{0, 1, 1, 5.0, 20.0});
    CHECK(monthly[1] == MonthlyRecord{0, 2, 1, 3.0, 8.0});
    CHECK(monthly[2] == MonthlyRecord{1, 1, 1, 1.0, 5.0});
    CHECK(aggregate_monthly({}).empty());
}

TEST_CASE("aggregate_monthly agrees with a sort-and-sum oracle") {
    std::mt19937_64 gen(11);
    for (int round = 0; round < 5; ++round) {
        const auto rows = testing_support::random_daily_rows(gen, 2000);
        const auto expected = testing_support::brute_group_sum(rows);
        const auto monthly = aggregate_monthly(rows);
        REQUIRE(monthly.size() == expected.size());
        for (std::size_t k = 0; k < monthly.size(); ++k) {
            const auto& [m, s, i, sum] = expected[k];
            CHECK(monthly[k].month_index == m);
            CHECK(monthly[k].shop_id == s);
            CHECK(monthly[k].item_id == i);
            CHECK(monthly[k].item_cnt_month == sum);
        }
    }
}

TEST_CASE("build_matrix adds zero rows for every active shop and item") {
    const DailySalesTable sales{sale(0, 1, 10, 3.0), sale(0, 2, 11, 1.0), sale(1, 1, 11, 2.0)};
    const auto frame = build_matrix(aggregate_monthly(sales), MonthRange{0, 1});
    REQUIRE(frame.rows() == 5);
    std::map<std::tuple<int, int, int>, double> cells;
    for (std::size_t r = 0; r < frame.rows(); ++r) cells[{frame.month[r], frame.shop[r], frame.item[r]}] = frame.target[r];
    const std::map<std::tuple<int, int, int>, double> expected{
        {{0, 1, 10}, 3.0}, {{0, 1, 11}, 0.0}, {{0, 2, 10}, 0.0}, {{0, 2, 11}, 1.0}, {{1, 1, 11}, 2.0}};
    CHECK(cells == expected);
}

TEST_CASE("build_matrix cardinality and uniqueness on random data") {
    std::mt19937_64 gen(5);
    const auto rows = testing_support::random_daily_rows(gen, 3000);
    const auto monthly = aggregate_monthly(rows);
    const auto frame = build_matrix(monthly, month_span(monthly));
    CHECK(frame.rows() == testing_support::brute_matrix_rows(rows));
    std::set<std::tuple<int, int, int>> keys;
    for (std::size_t r = 0; r < frame.rows(); ++r) keys.insert({frame.month[r], frame.shop[r], frame.item[r]});
    CHECK(keys.size() == frame.rows());
}

TEST_CASE("build_matrix errors on a month without sales") {
    const DailySalesTable sales{sale(0, 1, 1, 1.0), sale(2, 1, 1, 1.0)};
    try {
        build_matrix(aggregate_monthly(sales), MonthRange{0, 2});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("month 1") != std::string::npos);
    }
}

TEST_CASE("clip_target bounds every target") {
    FeatureFrame f;
    f.push_row(0, 0, 0, -3.0);
    f.push_row(0, 0, 1, 25.0);
    f.push_row(0, 0, 2, 7.5);
    f.push_row(1, 0, 0, kNoTarget, 0);
    const auto clipped = clip_target(f, ClipRange{});
    CHECK(clipped.target[0] == 0.0);
    CHECK(clipped.target[1] == 20.0);
    CHECK(clipped.target[2] == 7.5);
    CHECK(std::isnan(clipped.target[3]));
}

TEST_CASE("append_test adds target-free rows for the forecast month") {
    FeatureFrame f;
    f.push_row(0, 1, 1, 2.0);
    const auto catalog = catalog_for({{1, 0}, {2, 0}});
    TestSet test{{{0, 1, 1}, {1, 1, 2}}, 1};
    const auto out = append_test(f, test, catalog);
    REQUIRE(out.rows() == 3);
    CHECK(out.month[2] == 1);
    CHECK(out.row_id[2] == 1);
    CHECK_FALSE(out.has_target(1));

    SUBCASE("wrong month") {
        TestSet wrong = test;
        wrong.target_month = 0;
        CHECK_THROWS_AS(append_test(f, wrong, catalog), Error);
    }
    SUBCASE("duplicate pair") {
        TestSet dup{{{0, 1, 1}, {1, 1, 1}}, 1};
        CHECK_THROWS_AS(append_test(f, dup, catalog), Error);
    }
    SUBCASE("unknown item") {
        TestSet unknown{{{0, 1, 9}}, 1};
        CHECK_THROWS_AS(append_test(f, unknown, catalog), Error);
    }
}

TEST_CASE("add_features computes lags and group means from earlier months only") {
    // Shops 1 and 2, items 10 (category 0) and 11 (category 1), months 0..2.
    FeatureFrame f;
    f.push_row(0, 1, 10, 4.0);
    f.push_row(0, 1, 11, 0.0);
    f.push_row(0, 2, 10, 2.0);
    f.push_row(0, 2, 11, 6.0);
    f.push_row(1, 1, 10, 1.0);
    f.push_row(1, 2, 10, 3.0);
    f.push_row(2, 1, 10, kNoTarget, 0);
    f.push_row(2, 2, 11, kNoTarget, 1);
    const DailySalesTable sales{sale(0, 1, 10, 4.0, 12.0), sale(1, 1, 10, 1.0, 9.0)};
    const auto catalog = catalog_for({{10, 0}, {11, 1}});

    FeatureRecipe recipe;
    recipe.target_lags = {1, 2};
    recipe.group_mean_lags = {{"item", 1}, {"shop", 2}, {"category", 1}, {"item_shop", 1}};
    recipe.missing_lag_fill = -1.0;
    const auto out = add_features(f, aggregate_monthly(sales), catalog, recipe);

    auto col = [&](const char* name) { return out.features[out.feature_index(name)]; };
    CHECK(col("lag_1") == std::vector<double>{-1, -1, -1, -1, 4, 2, 1, -1});
    CHECK(col("lag_2") == std::vector<double>{-1, -1, -1, -1, -1, -1, 4, 6});
    CHECK(col("item_mean_lag_1") == std::vector<double>{-1, -1, -1, -1, 3, 3, 2, -1});
    CHECK(col("shop_mean_lag_2") == std::vector<double>{-1, -1, -1, -1, -1, -1, 2, 4});
    CHECK(col("category_mean_lag_1") == std::vector<double>{-1, -1, -1, -1, 3, 3, 2, -1});
    CHECK(col("item_shop_mean_lag_1") == col("lag_1"));
    CHECK(col("price_lag_1") == std::vector<double>{-1, -1, -1, -1, 12, -1, 9, -1});
    CHECK(col("month_of_year") == std::vector<double>{0, 0, 0, 0, 1, 1, 2, 2});
    CHECK(col("category_id") == std::vector<double>{0, 1, 0, 1, 0, 0, 0, 1});
    CHECK(out.feature_count() == 9);
}

TEST_CASE("add_features feature values do not depend on the current or later months") {
    SynthConfig cfg;
    cfg.n_shops = 4;
    cfg.n_items = 20;
    cfg.n_months = 14;
    const auto data = generate_synthetic(cfg);
    const auto monthly = aggregate_monthly(data.sales);
    const auto frame = clip_target(build_matrix(monthly, month_span(monthly)), ClipRange{});
    const FeatureRecipe recipe;
    const auto base = add_features(frame, monthly, data.catalog, recipe);

    // Perturb the targets and prices of month 8 and later; months up to 8 must not move.
    FeatureFrame perturbed = frame;
    for (std::size_t r = 0; r < perturbed.rows(); ++r)
        if (perturbed.month[r] >= 8) perturbed.target[r] = 20.0 - perturbed.target[r];
    MonthlyTable perturbed_monthly = monthly;
    for (auto& m : perturbed_monthly)
        if (m.month_index >= 8) m.avg_item_price += 1.0;
    const auto moved = add_features(perturbed, perturbed_monthly, data.catalog, recipe);
    for (std::size_t r = 0; r < base.rows(); ++r) {
        if (base.month[r] > 8) continue;
        for (std::size_t c = 0; c < base.feature_count(); ++c) CHECK(base.features[c][r] == moved.features[c][r]);
    }
}

TEST_CASE("add_features rejects an unknown grouping") {
    FeatureFrame f;
    f.push_row(0, 1, 1, 1.0);
    FeatureRecipe recipe;
    recipe.group_mean_lags = {{"region", 1}};
    CHECK_THROWS_AS(add_features(f, {}, catalog_for({{1, 0}}), recipe), Error);
}

TEST_CASE("frame lookup of a missing feature names it") {
    FeatureFrame f;
    f.push_row(0, 1, 1, 1.0);
    f.add_feature("lag_1", {0.0});
    try {
        f.feature_index("lag_12");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Schema);
        CHECK(std::string(e.what()).find("lag_12") != std::string::npos);
    }
    CHECK_THROWS_AS(f.add_feature("lag_1", {1.0}), Error);
    CHECK_THROWS_AS(f.add_feature("lag_2", {1.0, 2.0}), Error);
}

TEST_CASE("split_train_valid honours the warm-up and holdout month") {
    FeatureFrame f;
    for (MonthIndex m = 0; m < 6; ++m) f.push_row(m, 0, 0, double(m));
    f.push_row(6, 0, 0, kNoTarget, 0);
    const auto split = split_train_valid(f, 5, 2);
    CHECK(split.train.month == std::vector<MonthIndex>{2, 3, 4});
    CHECK(split.valid.month == std::vector<MonthIndex>{5});
    CHECK(split.dropped == 2);
    CHECK_THROWS_AS(split_train_valid(f, 9, 2), Error);

    CHECK(training_rows(f, 3).month == std::vector<MonthIndex>{3, 4, 5});
    CHECK(test_rows(f).month == std::vector<MonthIndex>{6});
    CHECK(training_months(f).first == 0);
    CHECK(training_months(f).last == 5);
}

TEST_CASE("frame persistence round-trips") {
    SynthConfig cfg;
    cfg.n_shops = 3;
    cfg.n_items = 12;
    cfg.n_months = 14;
    const auto data = generate_synthetic(cfg);
    const auto monthly = aggregate_monthly(data.sales);
    auto frame = clip_target(build_matrix(monthly, month_span(monthly)), ClipRange{});
    frame = append_test(frame, data.test, data.catalog);
    FeatureRecipe recipe;
    recipe.target_lags = {1, 3};
    frame = add_features(frame, monthly, data.catalog, recipe);

    TempDir dir("frame");
    save_frame(frame, recipe, dir / "frame.csv", dir / "frame.schema.json");
    const auto loaded = load_frame(dir / "frame.csv", dir / "frame.schema.json");
    CHECK(loaded.frame == frame);
    CHECK(loaded.recipe.target_lags == recipe.target_lags);
    CHECK(loaded.recipe.group_mean_lags == recipe.group_mean_lags);
}
