#include "salesrf/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"
#include "salesrf/model_io.hpp"
#include "salesrf/rng.hpp"

namespace salesrf {

namespace {

double stable_mean(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    const double low = values.front();
    double spread = 0.0;
    for (const double v : values) spread += v - low;
    return low + spread / static_cast<double>(values.size());
}

}  // namespace

void EnsembleSpec::validate() const {
    if (k < 1) throw Error(ErrorKind::Config, "ensemble size k must be >= 1");
    params.validate();
}

std::vector<std::uint64_t> EnsembleSpec::member_seeds() const {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < k; ++i) seeds.push_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
    return seeds;
}

std::vector<ForestModel> fit_mean_ensemble(const FeatureFrame& frame, const EnsembleSpec& spec,
                                           unsigned threads) {
    spec.validate();
    std::vector<ForestModel> members;
    for (const auto seed : spec.member_seeds()) {
        ForestParams params = spec.params;
        params.master_seed = seed;
        members.push_back(fit_forest(frame, params, threads));
    }
    return members;
}

std::vector<double> predict_mean_ensemble(std::span<const ForestModel> models, const FeatureFrame& frame) {
    if (models.empty()) throw Error(ErrorKind::Model, "ensemble has no members");
    std::vector<std::vector<double>> member_predictions;
    for (const auto& m : models) member_predictions.push_back(predict(m, frame));
    std::vector<double> out(frame.rows());
    std::vector<double> values(models.size());
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        for (std::size_t m = 0; m < models.size(); ++m) values[m] = member_predictions[m][r];
        out[r] = stable_mean(values);
    }
    return out;
}

std::optional<LinearFit> solve_meta_weights(std::span<const std::vector<double>> columns,
                                            std::span<const double> y) {
    const std::size_t p = columns.size() + 1;
    const std::size_t n = y.size();
    for (const auto& c : columns) {
        if (c.size() != n) throw Error(ErrorKind::Data, "meta columns differ in length from targets");
    }
    auto design = [&](std::size_t row, std::size_t j) { return j == 0 ? 1.0 : columns[j - 1][row]; };

    // Augmented normal matrix [X'X | X'y].
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            const double xi = design(r, i);
            for (std::size_t j = 0; j < p; ++j) a[i][j] += xi * design(r, j);
            a[i][p] += xi * y[r];
        }
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, std::abs(a[i][i]));
    if (scale == 0.0) return std::nullopt;

    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) <= 1e-12 * scale) return std::nullopt;
        std::swap(a[col], a[pivot]);
        for (std::size_t r = col + 1; r < p; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= p; ++c) a[r][c] -= factor * a[col][c];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t i = p; i-- > 0;) {
        double v = a[i][p];
        for (std::size_t j = i + 1; j < p; ++j) v -= a[i][j] * beta[j];
        beta[i] = v / a[i][i];
    }
    LinearFit fit;
    fit.intercept = beta[0];
    fit.weights.assign(beta.begin() + 1, beta.end());
    return fit;
}

StackedModel fit_stacked(const FeatureFrame& frame, std::span<const ForestParams> base_specs,
                         int folds, MonthIndex valid_month, unsigned threads) {
    if (folds < 2) throw Error(ErrorKind::Config, fmt::format("stacking needs >= 2 folds, got {}", folds));
    if (base_specs.empty()) throw Error(ErrorKind::Config, "stacking needs at least one base model");
    for (const auto& spec : base_specs) spec.validate();

    StackedModel model;
    model.base_specs.assign(base_specs.begin(), base_specs.end());
    model.folds = folds;

    std::set<MonthIndex> month_set;
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (frame.has_target(r) && frame.month[r] < valid_month) {
            model.rows.push_back(r);
            month_set.insert(frame.month[r]);
        }
    }
    const std::vector<MonthIndex> months(month_set.begin(), month_set.end());
    if (months.size() < static_cast<std::size_t>(folds)) {
        throw Error(ErrorKind::Data, fmt::format("{} months before month {} cannot form {} folds",
                                                 months.size(), valid_month, folds));
    }
    auto fold_of_month = [&](MonthIndex m) {
        const auto pos = static_cast<std::size_t>(std::lower_bound(months.begin(), months.end(), m) - months.begin());
        return static_cast<int>(pos * static_cast<std::size_t>(folds) / months.size());
    };
    for (const auto r : model.rows) model.fold_of_row.push_back(fold_of_month(frame.month[r]));

    const FeatureFrame stack_frame = frame.select(model.rows);
    const std::size_t n_bases = base_specs.size();
    const std::size_t n_folds = static_cast<std::size_t>(folds);
    model.oof.assign(n_bases, std::vector<double>(model.rows.size(), 0.0));

    std::vector<std::vector<std::size_t>> in_fold(n_folds);
    std::vector<std::vector<std::size_t>> out_fold(n_folds);
    for (std::size_t i = 0; i < model.rows.size(); ++i) {
        for (std::size_t f = 0; f < n_folds; ++f) {
            (static_cast<std::size_t>(model.fold_of_row[i]) == f ? in_fold[f] : out_fold[f]).push_back(i);
        }
    }

    // One task per (fold, base) plus one refit per base on all rows.
    model.bases.resize(n_bases);
    parallel_for(n_folds * n_bases + n_bases, threads, [&](std::size_t task) {
        if (task >= n_folds * n_bases) {
            const std::size_t b = task - n_folds * n_bases;
            model.bases[b] = fit_forest(stack_frame, base_specs[b], 1);
            return;
        }
        const std::size_t f = task / n_bases;
        const std::size_t b = task % n_bases;
        const auto fitted = fit_forest(stack_frame.select(out_fold[f]), base_specs[b], 1);
        const auto held_out = stack_frame.select(in_fold[f]);
        const auto pred = predict(fitted, held_out);
        for (std::size_t k = 0; k < in_fold[f].size(); ++k) model.oof[b][in_fold[f][k]] = pred[k];
    });

    const auto meta = solve_meta_weights(model.oof, stack_frame.target);
    if (meta) {
        model.meta = *meta;
    } else {
        model.meta.intercept = 0.0;
        model.meta.weights.assign(n_bases, 1.0 / static_cast<double>(n_bases));
        model.warnings.push_back("meta-learner normal equations are singular; using equal weights");
    }
    return model;
}

std::vector<double> predict_stacked(const StackedModel& model, const FeatureFrame& frame) {
    return stacked_artifact(model).predict(frame);
}

std::vector<double> EnsembleArtifact::predict(const FeatureFrame& frame) const {
    if (kind == Kind::Mean) return predict_mean_ensemble(members, frame);
    if (members.empty() || meta.weights.size() != members.size())
        throw Error(ErrorKind::Model, "stacked model has inconsistent base/weight counts");
    std::vector<double> out(frame.rows(), meta.intercept);
    for (std::size_t b = 0; b < members.size(); ++b) {
        const auto pred = salesrf::predict(members[b], frame);
        for (std::size_t r = 0; r < frame.rows(); ++r) out[r] += meta.weights[b] * pred[r];
    }
    return out;
}

EnsembleArtifact mean_artifact(std::vector<ForestModel> members, std::vector<std::uint64_t> seeds) {
    EnsembleArtifact a;
    a.kind = EnsembleArtifact::Kind::Mean;
    a.members = std::move(members);
    a.member_seeds = std::move(seeds);
    return a;
}

EnsembleArtifact stacked_artifact(const StackedModel& model) {
    EnsembleArtifact a;
    a.kind = EnsembleArtifact::Kind::Stacked;
    a.members = model.bases;
    for (const auto& spec : model.base_specs) a.member_seeds.push_back(spec.master_seed);
    a.meta = model.meta;
    a.folds = model.folds;
    a.warnings = model.warnings;
    return a;
}

void save_artifact(const EnsembleArtifact& artifact, const std::filesystem::path& manifest_path) {
    nlohmann::ordered_json manifest;
    manifest["format"] = "salesrf-ensemble";
    manifest["version"] = 1;
    manifest["kind"] = artifact.kind == EnsembleArtifact::Kind::Mean ? "mean" : "stacked";
    if (artifact.kind == EnsembleArtifact::Kind::Stacked) {
        manifest["folds"] = artifact.folds;
        manifest["intercept"] = artifact.meta.intercept;
        manifest["warnings"] = artifact.warnings;
    }
    auto& members = manifest["members"] = nlohmann::ordered_json::array();
    const auto stem = manifest_path.stem().string();
    for (std::size_t i = 0; i < artifact.members.size(); ++i) {
        const auto file = fmt::format("{}.member_{}.model", stem, i);
        save_model(artifact.members[i], manifest_path.parent_path() / file);
        nlohmann::ordered_json entry{{"file", file}, {"seed", artifact.member_seeds.at(i)}};
        if (artifact.kind == EnsembleArtifact::Kind::Stacked) entry["weight"] = artifact.meta.weights.at(i);
        members.push_back(entry);
    }
    csv::write_text_file(manifest_path, manifest.dump(2) + "\n");
}

EnsembleArtifact load_artifact(const std::filesystem::path& manifest_path) {
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(csv::read_text_file(manifest_path));
        if (manifest.value("format", "") != "salesrf-ensemble")
            throw Error(ErrorKind::Model, fmt::format("{}: not an ensemble manifest", manifest_path.string()));
        if (manifest.value("version", 0) != 1) {
            throw Error(ErrorKind::Version,
                        fmt::format("{}: manifest version {} is not supported (this build reads version 1)",
                                    manifest_path.string(), manifest.value("version", 0)));
        }
        EnsembleArtifact a;
        const auto kind = manifest.at("kind").get<std::string>();
        if (kind == "mean") {
            a.kind = EnsembleArtifact::Kind::Mean;
        } else if (kind == "stacked") {
            a.kind = EnsembleArtifact::Kind::Stacked;
            a.folds = manifest.at("folds").get<int>();
            a.meta.intercept = manifest.at("intercept").get<double>();
            a.warnings = manifest.value("warnings", std::vector<std::string>{});
        } else {
            throw Error(ErrorKind::Model, fmt::format("{}: unknown ensemble kind '{}'", manifest_path.string(), kind));
        }
        for (const auto& entry : manifest.at("members")) {
            a.members.push_back(load_model(manifest_path.parent_path() / entry.at("file").get<std::string>()));
            a.member_seeds.push_back(entry.at("seed").get<std::uint64_t>());
            if (a.kind == EnsembleArtifact::Kind::Stacked) a.meta.weights.push_back(entry.at("weight").get<double>());
        }
        if (a.members.empty()) throw Error(ErrorKind::Model, fmt::format("{}: no members", manifest_path.string()));
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, fmt::format("{}: {}", manifest_path.string(), e.what()));
    }
}

}  // namespace salesrf
