#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <set>

#include "salesrf/ensemble.hpp"
#include "salesrf/error.hpp"
#include "support.hpp"

using namespace salesrf;
using testing_support::TempDir;

namespace {

/// Monthly frame with a learnable target: rows spread over months 0..5.
FeatureFrame monthly_frame(std::size_t per_month, int months, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    FeatureFrame f;
    std::vector<double> a, b;
    for (int m = 0; m < months; ++m) {
        for (std::size_t i = 0; i < per_month; ++i) {
            const double x0 = unit(gen);
            const double x1 = unit(gen);
            f.push_row(m, 0, static_cast<ItemId>(i), 5.0 * x0 + x1 * x1 + 0.3 * unit(gen));
            a.push_back(x0);
            b.push_back(x1);
        }
    }
    f.add_feature("x0", a);
    f.add_feature("x1", b);
    return f;
}

ForestParams small_params() {
    ForestParams p;
    p.n_trees = 8;
    p.max_depth = 6;
    p.min_samples_split = 4;
    p.min_samples_leaf = 2;
    p.max_features = 1.0;
    return p;
}

}  // namespace

TEST_CASE("member seeds are distinct and derived from the ensemble seed") {
    EnsembleSpec spec;
    spec.k = 50;
    const auto seeds = spec.member_seeds();
    CHECK(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == 50);
    spec.k = 5;
    const auto prefix = spec.member_seeds();
    CHECK(std::equal(prefix.begin(), prefix.end(), seeds.begin()));
    spec.k = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("mean ensemble of one member equals that forest") {
    const auto frame = monthly_frame(40, 3, 1);
    EnsembleSpec spec{1, 9, small_params()};
    const auto members = fit_mean_ensemble(frame, spec);
    ForestParams p = small_params();
    p.master_seed = spec.member_seeds()[0];
    const auto single = fit_forest(frame, p);
    CHECK(members[0] == single);
    const auto a = predict_mean_ensemble(members, frame);
    const auto b = predict(single, frame);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::memcmp(&a[i], &b[i], sizeof(double)) == 0);
}

TEST_CASE("mean ensemble of identical members is exact") {
    const auto frame = monthly_frame(40, 3, 2);
    const auto model = fit_forest(frame, small_params());
    const std::vector<ForestModel> copies(7, model);
    const auto a = predict_mean_ensemble(copies, frame);
    const auto b = predict(model, frame);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::memcmp(&a[i], &b[i], sizeof(double)) == 0);
}

TEST_CASE("mean ensemble is invariant to member order and bounded by members") {
    const auto frame = monthly_frame(40, 3, 3);
    auto members = fit_mean_ensemble(frame, EnsembleSpec{4, 5, small_params()});
    const auto before = predict_mean_ensemble(members, frame);
    std::vector<std::vector<double>> each;
    for (const auto& m : members) each.push_back(predict(m, frame));
    std::reverse(members.begin(), members.end());
    std::rotate(members.begin(), members.begin() + 1, members.end());
    const auto after = predict_mean_ensemble(members, frame);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(std::memcmp(&before[i], &after[i], sizeof(double)) == 0);
        double lo = each[0][i], hi = each[0][i];
        for (const auto& e : each) {
            lo = std::min(lo, e[i]);
            hi = std::max(hi, e[i]);
        }
        CHECK(before[i] >= lo);
        CHECK(before[i] <= hi);
    }
}

TEST_CASE("ensemble fit is independent of the thread count") {
    const auto frame = monthly_frame(50, 3, 4);
    const EnsembleSpec spec{3, 11, small_params()};
    CHECK(fit_mean_ensemble(frame, spec, 1) == fit_mean_ensemble(frame, spec, 3));
}

TEST_CASE("solve_meta_weights recovers an exact linear fit") {
    const std::vector<std::vector<double>> columns{{1, 2, 3, 4, 5, 6}, {2, 1, 4, 3, 6, 5}};
    const std::vector<double> y{3, 4, 8, 8, 12, 13};
    const auto fit = solve_meta_weights(columns, y);
    REQUIRE(fit);
    CHECK(fit->intercept == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(fit->weights[0] == doctest::Approx(1.4583333333333333).epsilon(1e-12));
    CHECK(fit->weights[1] == doctest::Approx(0.7916666666666666).epsilon(1e-12));

    CHECK_FALSE(solve_meta_weights(std::vector<std::vector<double>>{{1, 2, 3}, {1, 2, 3}}, std::vector<double>{1, 2, 3}));
    CHECK_FALSE(solve_meta_weights(std::vector<std::vector<double>>{{4, 4, 4}}, std::vector<double>{1, 2, 3}));
}

TEST_CASE("stacking folds are contiguous month blocks") {
    const auto frame = monthly_frame(30, 7, 5);
    ForestParams a = small_params();
    ForestParams b = small_params();
    b.max_depth = 3;
    b.master_seed = 8;
    const std::vector<ForestParams> bases{a, b};
    const auto model = fit_stacked(frame, bases, 3, 6, 1);
    REQUIRE(model.rows.size() == 180);
    for (auto r : model.rows) CHECK(frame.month[r] < 6);
    for (std::size_t i = 1; i < model.rows.size(); ++i) {
        const bool later = frame.month[model.rows[i]] > frame.month[model.rows[i - 1]];
        CHECK(model.fold_of_row[i] >= model.fold_of_row[i - 1]);
        if (!later) CHECK(model.fold_of_row[i] == model.fold_of_row[i - 1]);
    }
    CHECK(std::set<int>(model.fold_of_row.begin(), model.fold_of_row.end()).size() == 3);
    CHECK(model.warnings.empty());
}

TEST_CASE("out-of-fold predictions ignore the fold's own targets") {
    const auto frame = monthly_frame(30, 6, 6);
    const std::vector<ForestParams> bases{small_params()};
    const auto model = fit_stacked(frame, bases, 3, 6, 1);
    for (int fold = 0; fold < 3; ++fold) {
        FeatureFrame perturbed = frame;
        for (std::size_t i = 0; i < model.rows.size(); ++i)
            if (model.fold_of_row[i] == fold) perturbed.target[model.rows[i]] += 100.0;
        const auto moved = fit_stacked(perturbed, bases, 3, 6, 1);
        for (std::size_t i = 0; i < model.rows.size(); ++i) {
            if (model.fold_of_row[i] != fold) continue;
            CHECK(std::memcmp(&model.oof[0][i], &moved.oof[0][i], sizeof(double)) == 0);
        }
    }
}

TEST_CASE("identical bases fall back to equal weights with a warning") {
    const auto frame = monthly_frame(20, 4, 7);
    const std::vector<ForestParams> bases(3, small_params());
    const auto model = fit_stacked(frame, bases, 2, 4, 1);
    REQUIRE(model.warnings.size() == 1);
    CHECK(model.meta.intercept == 0.0);
    for (double w : model.meta.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("stacking rejects bad settings") {
    const auto frame = monthly_frame(10, 3, 8);
    const std::vector<ForestParams> bases{small_params()};
    CHECK_THROWS_AS(fit_stacked(frame, bases, 1, 3), Error);
    CHECK_THROWS_AS(fit_stacked(frame, bases, 4, 3), Error);
    CHECK_THROWS_AS(fit_stacked(frame, std::vector<ForestParams>{}, 2, 3), Error);
}

TEST_CASE("artifacts round-trip through disk") {
    const auto frame = monthly_frame(30, 5, 9);
    TempDir dir("artifact");

    SUBCASE("mean") {
        const EnsembleSpec spec{3, 4, small_params()};
        const auto artifact = mean_artifact(fit_mean_ensemble(frame, spec), spec.member_seeds());
        save_artifact(artifact, dir / "ensemble.json");
        CHECK(std::filesystem::exists(dir / "ensemble.member_2.model"));
        const auto loaded = load_artifact(dir / "ensemble.json");
        CHECK(loaded.members == artifact.members);
        CHECK(loaded.member_seeds == artifact.member_seeds);
        CHECK(loaded.predict(frame) == artifact.predict(frame));
    }
    SUBCASE("stacked") {
        ForestParams other = small_params();
        other.master_seed = 99;
        const std::vector<ForestParams> bases{small_params(), other};
        const auto model = fit_stacked(frame, bases, 2, 4, 1);
        const auto artifact = stacked_artifact(model);
        save_artifact(artifact, dir / "stacked.json");
        const auto loaded = load_artifact(dir / "stacked.json");
        CHECK(loaded.kind == EnsembleArtifact::Kind::Stacked);
        CHECK(loaded.meta.weights == artifact.meta.weights);
        CHECK(loaded.predict(frame) == predict_stacked(model, frame));
    }
    SUBCASE("missing member file") {
        const EnsembleSpec spec{2, 4, small_params()};
        save_artifact(mean_artifact(fit_mean_ensemble(frame, spec), spec.member_seeds()), dir / "e.json");
        std::filesystem::remove(dir / "e.member_1.model");
        CHECK_THROWS_AS(load_artifact(dir / "e.json"), Error);
    }
}
