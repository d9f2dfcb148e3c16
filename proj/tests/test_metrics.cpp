#include <doctest.h>

#include <cmath>
#include <random>

#include "salesrf/error.hpp"
#include "salesrf/metrics.hpp"
#include "support.hpp"

using namespace salesrf;

TEST_CASE("rmse known values") {
    CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{5, 0}) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
    CHECK(rmse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK_THROWS_AS(rmse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST_CASE("r_squared known values") {
    CHECK(r_squared(std::vector<double>{1, 2}, std::vector<double>{1, 3}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r_squared(std::vector<double>{1, 3}, std::vector<double>{1, 3}) == 1.0);
    CHECK_THROWS_AS(r_squared(std::vector<double>{1, 2}, std::vector<double>{2, 2}), Error);
    CHECK_THROWS_AS(r_squared(std::vector<double>{1}, std::vector<double>{2}), Error);
}

TEST_CASE("metrics agree with long-double references on random pairs") {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::uniform_int_distribution<int> count(0, 20);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = 2 + gen() % 500;
        std::vector<double> actual(n), pred(n);
        for (std::size_t i = 0; i < n; ++i) {
            actual[i] = count(gen);
            pred[i] = actual[i] + noise(gen);
        }
        actual[0] = 0.0;
        actual[1] = 20.0;
        CHECK(std::abs(rmse(pred, actual) - testing_support::direct_rmse(pred, actual)) <= 1e-12);
        CHECK(std::abs(r_squared(pred, actual) - testing_support::direct_r_squared(pred, actual)) <= 1e-12);
    }
}

TEST_CASE("rmse properties") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    std::vector<double> a(100), b(100);
    for (auto& v : a) v = unit(gen);
    for (auto& v : b) v = unit(gen);
    CHECK(rmse(a, b) >= 0.0);
    CHECK(rmse(a, b) == doctest::Approx(rmse(b, a)).epsilon(1e-15));
    std::vector<double> shifted = a;
    for (auto& v : shifted) v += 1.5;
    CHECK(rmse(shifted, a) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("global mean baseline") {
    FeatureFrame train;
    for (double y : {1.0, 2.0, 3.0, 6.0}) train.push_row(0, 0, 0, y);
    FeatureFrame valid;
    for (double y : {0.0, 3.0, 5.0, 4.0}) valid.push_row(1, 0, 0, y);
    const auto b = baselines(train, valid);
    CHECK(b.at("global_mean") == doctest::Approx(1.8708286933869707).epsilon(1e-14));
    // No lag_1 column: the last-month baseline predicts zero.
    CHECK(b.at("last_month") == doctest::Approx(std::sqrt(50.0 / 4.0)).epsilon(1e-14));
}

TEST_CASE("last month baseline reads and clips lag_1") {
    FeatureFrame train;
    train.push_row(0, 0, 0, 1.0);
    FeatureFrame valid;
    valid.push_row(1, 0, 0, 4.0);
    valid.push_row(1, 0, 1, 20.0);
    valid.add_feature("lag_1", {2.0, 30.0});
    const auto b = baselines(train, valid, ClipRange{});
    CHECK(b.at("last_month") == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("score_predictions clips before scoring") {
    const auto report = score_predictions(std::vector<double>{-2.0, 25.0}, std::vector<double>{0.0, 20.0}, ClipRange{});
    CHECK(report.rmse == 0.0);
    CHECK(report.n == 2);
    CHECK(report.r_squared == 1.0);

    const auto constant = score_predictions(std::vector<double>{1.0, 2.0}, std::vector<double>{3.0, 3.0}, ClipRange{});
    CHECK(std::isnan(constant.r_squared));
    CHECK(format_report(constant).find("rmse") != std::string::npos);
    CHECK(report_csv(report).find("rmse") != std::string::npos);
}
