#include "salesrf/config.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"
#include "salesrf/rng.hpp"
#include "salesrf/serialization.hpp"

namespace salesrf {

namespace {

std::filesystem::path or_default(const std::filesystem::path& p, const std::filesystem::path& dir,
                                 const char* name) {
    return p.empty() ? dir / name : p;
}

}  // namespace

std::filesystem::path RunPaths::sales_file() const { return or_default(sales, data_dir, "sales_train.csv"); }
std::filesystem::path RunPaths::items_file() const { return or_default(items, data_dir, "items.csv"); }
std::filesystem::path RunPaths::shops_file() const { return or_default(shops, data_dir, "shops.csv"); }
std::filesystem::path RunPaths::categories_file() const {
    return or_default(categories, data_dir, "item_categories.csv");
}
std::filesystem::path RunPaths::test_file() const { return or_default(test, data_dir, "test.csv"); }
std::filesystem::path RunPaths::truth_file() const { return or_default(truth, data_dir, "truth.csv"); }

void RunConfig::apply_seed(std::uint64_t seed) {
    synth.noise_seed = seed;
    forest.master_seed = seed;
    ensemble.seed = seed;
    grid.master_seed = seed;
    for (std::size_t b = 0; b < stack.bases.size(); ++b) stack.bases[b].master_seed = derive_seed(seed, b);
}

std::vector<ForestParams> RunConfig::stack_bases() const {
    if (!stack.bases.empty()) return stack.bases;
    std::vector<ForestParams> bases;
    for (std::uint64_t b = 0; b < 3; ++b) {
        ForestParams p = forest;
        p.master_seed = derive_seed(forest.master_seed, b);
        bases.push_back(p);
    }
    return bases;
}

RunConfig parse_run_config(std::string_view json_text, std::string_view source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, fmt::format("{}: {}", source, e.what()));
    }
    if (!j.is_object()) throw Error(ErrorKind::Config, fmt::format("{}: top level must be an object", source));

    RunConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "paths") {
                for (const auto& [name, p] : value.items()) {
                    const std::filesystem::path path = p.get<std::string>();
                    if (name == "data_dir") c.paths.data_dir = path;
                    else if (name == "output_dir") c.paths.output_dir = path;
                    else if (name == "sales") c.paths.sales = path;
                    else if (name == "items") c.paths.items = path;
                    else if (name == "shops") c.paths.shops = path;
                    else if (name == "categories") c.paths.categories = path;
                    else if (name == "test") c.paths.test = path;
                    else if (name == "truth") c.paths.truth = path;
                    else throw Error(ErrorKind::Config, fmt::format("unknown key '{}' in 'paths'", name));
                }
            } else if (key == "synth") {
                c.synth = synth_from_json(value);
            } else if (key == "outliers") {
                c.outliers = outliers_from_json(value);
            } else if (key == "features") {
                c.recipe = recipe_from_json(value);
            } else if (key == "forest") {
                c.forest = params_from_json(value);
            } else if (key == "ensemble") {
                for (const auto& [name, v] : value.items()) {
                    if (name == "k") c.ensemble.k = v.get<int>();
                    else if (name == "seed") c.ensemble.seed = v.get<std::uint64_t>();
                    else throw Error(ErrorKind::Config, fmt::format("unknown key '{}' in 'ensemble'", name));
                }
            } else if (key == "stack") {
                for (const auto& [name, v] : value.items()) {
                    if (name == "folds") {
                        c.stack.folds = v.get<int>();
                    } else if (name == "bases") {
                        for (const auto& base : v) c.stack.bases.push_back(params_from_json(base, c.forest));
                    } else {
                        throw Error(ErrorKind::Config, fmt::format("unknown key '{}' in 'stack'", name));
                    }
                }
            } else if (key == "grid") {
                c.grid = grid_from_json(value);
            } else if (key == "clip") {
                c.clip = clip_from_json(value);
            } else if (key == "valid_month") {
                c.valid_month = value.get<MonthIndex>();
            } else {
                throw Error(ErrorKind::Config, fmt::format("unknown section '{}'", key));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, fmt::format("{}: {}", source, e.what()));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, fmt::format("{}: {}", source, e.what()));
    }
    c.ensemble.params = c.forest;
    if (c.stack.folds < 2) throw Error(ErrorKind::Config, fmt::format("{}: stack.folds must be >= 2", source));
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(csv::read_text_file(path), path.string());
}

}  // namespace salesrf
