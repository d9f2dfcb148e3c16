#include "salesrf/serialization.hpp"

#include <initializer_list>
#include <string_view>

#include <fmt/format.h>

#include "salesrf/error.hpp"

namespace salesrf {

namespace {

void require_keys(const nlohmann::json& j, std::string_view section,
                  std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw Error(ErrorKind::Config, fmt::format("'{}' must be an object", section));
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto a : allowed) known = known || key == a;
        if (!known) throw Error(ErrorKind::Config, fmt::format("unknown key '{}' in '{}'", key, section));
    }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, std::string_view section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::Config, fmt::format("'{}.{}' has the wrong type", section, key));
    }
}

}  // namespace

nlohmann::ordered_json recipe_to_json(const FeatureRecipe& r) {
    nlohmann::ordered_json j;
    j["target_lags"] = r.target_lags;
    auto& groups = j["group_mean_lags"] = nlohmann::ordered_json::array();
    for (const auto& [name, lag] : r.group_mean_lags) groups.push_back({{"grouping", name}, {"lag", lag}});
    j["include_price_lag1"] = r.include_price_lag1;
    j["include_month_of_year"] = r.include_month_of_year;
    j["include_category_id"] = r.include_category_id;
    j["missing_lag_fill"] = r.missing_lag_fill;
    return j;
}

FeatureRecipe recipe_from_json(const nlohmann::json& j) {
    constexpr std::string_view s = "features";
    require_keys(j, s, {"target_lags", "group_mean_lags", "include_price_lag1", "include_month_of_year",
                        "include_category_id", "missing_lag_fill"});
    FeatureRecipe r;
    read(j, "target_lags", r.target_lags, s);
    if (j.contains("group_mean_lags")) {
        r.group_mean_lags.clear();
        for (const auto& g : j.at("group_mean_lags")) {
            require_keys(g, "features.group_mean_lags[]", {"grouping", "lag"});
            std::string name;
            int lag = 1;
            read(g, "grouping", name, s);
            read(g, "lag", lag, s);
            r.group_mean_lags.emplace_back(name, lag);
        }
    }
    read(j, "include_price_lag1", r.include_price_lag1, s);
    read(j, "include_month_of_year", r.include_month_of_year, s);
    read(j, "include_category_id", r.include_category_id, s);
    read(j, "missing_lag_fill", r.missing_lag_fill, s);
    r.validate();
    return r;
}

nlohmann::ordered_json params_to_json(const ForestParams& p) {
    return {{"n_trees", p.n_trees},
            {"max_depth", p.max_depth},
            {"min_samples_split", p.min_samples_split},
            {"min_samples_leaf", p.min_samples_leaf},
            {"max_features", p.max_features},
            {"bootstrap", p.bootstrap},
            {"master_seed", p.master_seed}};
}

ForestParams params_from_json(const nlohmann::json& j, ForestParams p) {
    constexpr std::string_view s = "forest";
    require_keys(j, s, {"n_trees", "max_depth", "min_samples_split", "min_samples_leaf", "max_features",
                        "bootstrap", "master_seed"});
    read(j, "n_trees", p.n_trees, s);
    read(j, "max_depth", p.max_depth, s);
    read(j, "min_samples_split", p.min_samples_split, s);
    read(j, "min_samples_leaf", p.min_samples_leaf, s);
    read(j, "max_features", p.max_features, s);
    read(j, "bootstrap", p.bootstrap, s);
    read(j, "master_seed", p.master_seed, s);
    p.validate();
    return p;
}

OutlierPolicy outliers_from_json(const nlohmann::json& j) {
    constexpr std::string_view s = "outliers";
    require_keys(j, s, {"max_item_cnt_day", "max_item_price", "drop_nonpositive_price"});
    OutlierPolicy p;
    read(j, "max_item_cnt_day", p.max_item_cnt_day, s);
    read(j, "max_item_price", p.max_item_price, s);
    read(j, "drop_nonpositive_price", p.drop_nonpositive_price, s);
    p.validate();
    return p;
}

SynthConfig synth_from_json(const nlohmann::json& j) {
    constexpr std::string_view s = "synth";
    require_keys(j, s, {"n_shops", "n_items", "n_categories", "n_months", "base_rate", "seasonal_amplitude",
                        "trend", "affinity_sigma", "noise_seed"});
    SynthConfig c;
    read(j, "n_shops", c.n_shops, s);
    read(j, "n_items", c.n_items, s);
    read(j, "n_categories", c.n_categories, s);
    read(j, "n_months", c.n_months, s);
    read(j, "base_rate", c.base_rate, s);
    read(j, "seasonal_amplitude", c.seasonal_amplitude, s);
    read(j, "trend", c.trend, s);
    read(j, "affinity_sigma", c.affinity_sigma, s);
    read(j, "noise_seed", c.noise_seed, s);
    c.validate();
    return c;
}

GridSpec grid_from_json(const nlohmann::json& j) {
    constexpr std::string_view s = "grid";
    require_keys(j, s, {"n_trees", "max_depth", "min_samples_split", "min_samples_leaf", "max_features",
                        "bootstrap", "valid_month", "master_seed"});
    GridSpec g;
    read(j, "n_trees", g.n_trees, s);
    read(j, "max_depth", g.max_depth, s);
    read(j, "min_samples_split", g.min_samples_split, s);
    read(j, "min_samples_leaf", g.min_samples_leaf, s);
    read(j, "max_features", g.max_features, s);
    read(j, "bootstrap", g.bootstrap, s);
    read(j, "valid_month", g.valid_month, s);
    read(j, "master_seed", g.master_seed, s);
    return g;
}

ClipRange clip_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Config, "'clip' must be [lo, hi]");
    ClipRange c{j[0].get<double>(), j[1].get<double>()};
    if (!(c.lo < c.hi)) throw Error(ErrorKind::Config, "'clip' needs lo < hi");
    return c;
}

}  // namespace salesrf
