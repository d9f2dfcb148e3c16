#include "salesrf/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "salesrf/config.hpp"
#include "salesrf/csv.hpp"
#include "salesrf/ensemble.hpp"
#include "salesrf/error.hpp"
#include "salesrf/featurize.hpp"
#include "salesrf/io.hpp"
#include "salesrf/metrics.hpp"
#include "salesrf/model_io.hpp"
#include "salesrf/synth.hpp"
#include "salesrf/tune.hpp"

namespace salesrf::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kThreadsEnv = "SALESRF_THREADS";

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string data_dir;
    std::string output_dir;
};

struct Context {
    RunConfig config;
    unsigned threads = 1;
    std::ostream& out;
    std::ostream& err;

    fs::path artifact(const char* name) const { return config.paths.output_dir / name; }

    EnsembleSpec ensemble_spec() const {
        EnsembleSpec spec = config.ensemble;
        spec.params = config.forest;
        return spec;
    }
};

void require_artifact(const fs::path& path, const char* producer) {
    if (!fs::exists(path)) {
        throw Error(ErrorKind::Io,
                    fmt::format("missing artifact {} (produce it with 'salesrf {}')", path.string(), producer));
    }
}

unsigned resolve_threads(const std::optional<unsigned>& flag) {
    if (flag) return std::max(1u, *flag);
    if (const char* env = std::getenv(kThreadsEnv); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v == 0)
            throw Error(ErrorKind::Usage, fmt::format("{} must be a positive integer, got '{}'", kThreadsEnv, env));
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Context make_context(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    Context ctx{flags.config.empty() ? RunConfig{} : load_run_config(flags.config), 1, out, err};
    if (flags.seed) ctx.config.apply_seed(*flags.seed);
    if (!flags.data_dir.empty()) ctx.config.paths.data_dir = flags.data_dir;
    if (!flags.output_dir.empty()) ctx.config.paths.output_dir = flags.output_dir;
    ctx.threads = resolve_threads(flags.threads);
    return ctx;
}

struct FrameArtifact {
    FeatureFrame frame;
    FeatureRecipe recipe;
};

FrameArtifact load_frame_artifact(const Context& ctx) {
    const auto csv_path = ctx.artifact("frame.csv");
    const auto schema_path = ctx.artifact("frame.schema.json");
    require_artifact(csv_path, "featurize");
    require_artifact(schema_path, "featurize");
    auto loaded = load_frame(csv_path, schema_path);
    return {std::move(loaded.frame), std::move(loaded.recipe)};
}

MonthIndex resolve_valid_month(const RunConfig& config, const FeatureFrame& frame) {
    return config.valid_month >= 0 ? config.valid_month : training_months(frame).last;
}

fs::path model_manifest(const Context& ctx, const std::string& flag) {
    return flag.empty() ? ctx.artifact("ensemble.json") : fs::path(flag);
}

void ensure_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw Error(ErrorKind::Io, fmt::format("cannot create output directory {}", dir.string()));
}

// ---------------------------------------------------------------------------

void cmd_synth(Context& ctx) {
    const auto dir = ctx.config.paths.data_dir;
    ensure_output_dir(dir);
    const auto data = generate_synthetic(ctx.config.synth);
    save_sales_csv(data.sales, ctx.config.paths.sales_file());
    save_catalog(data.catalog, ctx.config.paths.items_file(), ctx.config.paths.shops_file(),
                 ctx.config.paths.categories_file());
    save_test_csv(data.test, ctx.config.paths.test_file());
    std::vector<std::pair<std::int64_t, double>> truth;
    for (const auto& row : data.test.rows) truth.emplace_back(row.row_id, data.truth.at({row.shop_id, row.item_id}));
    save_id_values(truth, ctx.config.paths.truth_file());
    ctx.out << fmt::format("synth: {} sales rows, {} test rows, months 0..{} -> {}\n", data.sales.size(),
                           data.test.rows.size(), ctx.config.synth.n_months - 1, dir.string());
}

void cmd_featurize(Context& ctx) {
    const auto& cfg = ctx.config;
    auto stage = [&](const char* name, std::size_t rows) {
        ctx.err << fmt::format("featurize: {:<16}{} rows\n", name, rows);
    };
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("stage {}: {}", name, e.what()));
        }
    };

    const auto sales = guarded("load", [&] { return load_sales_csv(cfg.paths.sales_file()); });
    stage("load", sales.size());
    const auto catalog = guarded("load", [&] {
        return load_catalog(cfg.paths.items_file(), cfg.paths.shops_file(), cfg.paths.categories_file());
    });
    const auto cleaned = guarded("outliers", [&] { return remove_outliers(sales, cfg.outliers); });
    stage("outliers", cleaned.sales.size());
    const auto monthly = guarded("aggregate", [&] { return aggregate_monthly(cleaned.sales); });
    stage("aggregate", monthly.size());
    auto frame = guarded("matrix", [&] { return build_matrix(monthly, month_span(monthly)); });
    stage("matrix", frame.rows());
    frame = guarded("clip", [&] { return clip_target(frame, cfg.clip); });
    stage("clip", frame.rows());
    const auto target_month = training_months(frame).last + 1;
    const auto test = guarded("append_test", [&] { return load_test_csv(cfg.paths.test_file(), target_month); });
    frame = guarded("append_test", [&] { return append_test(frame, test, catalog); });
    stage("append_test", frame.rows());
    frame = guarded("features", [&] { return add_features(frame, monthly, catalog, cfg.recipe); });
    stage("features", frame.rows());

    ensure_output_dir(cfg.paths.output_dir);
    save_frame(frame, cfg.recipe, ctx.artifact("frame.csv"), ctx.artifact("frame.schema.json"));
    ctx.out << fmt::format("featurize: {} rows ({} test), {} features -> {}\n", frame.rows(), test.rows.size(),
                           frame.feature_count(), ctx.artifact("frame.csv").string());
}

void cmd_train(Context& ctx, const std::string& model_flag) {
    const auto [frame, recipe] = load_frame_artifact(ctx);
    const auto train = training_rows(frame, recipe.max_lag());
    const auto spec = ctx.ensemble_spec();
    auto members = fit_mean_ensemble(train, spec, ctx.threads);
    const auto manifest = model_manifest(ctx, model_flag);
    ensure_output_dir(manifest.parent_path().empty() ? fs::path(".") : manifest.parent_path());
    save_artifact(mean_artifact(std::move(members), spec.member_seeds()), manifest);
    ctx.out << fmt::format("train: {} member(s) x {} trees on {} rows -> {}\n", spec.k, spec.params.n_trees,
                           train.rows(), manifest.string());
}

void cmd_predict(Context& ctx, const std::string& model_flag, const std::string& submission_flag) {
    const auto manifest = model_manifest(ctx, model_flag);
    require_artifact(manifest, "train");
    const auto artifact = load_artifact(manifest);
    const auto [frame, recipe] = load_frame_artifact(ctx);
    const auto test = test_rows(frame);
    const auto pred = artifact.predict(test);
    std::vector<std::pair<std::int64_t, double>> rows;
    for (std::size_t r = 0; r < test.rows(); ++r) rows.emplace_back(test.row_id[r], ctx.config.clip.apply(pred[r]));
    const fs::path path = submission_flag.empty() ? ctx.artifact("submission.csv") : fs::path(submission_flag);
    save_id_values(rows, path);
    ctx.out << fmt::format("predict: {} rows -> {}\n", rows.size(), path.string());
}

void cmd_tune(Context& ctx) {
    const auto [frame, recipe] = load_frame_artifact(ctx);
    GridSpec grid = ctx.config.grid;
    if (grid.valid_month < 0) grid.valid_month = resolve_valid_month(ctx.config, frame);
    const auto result = grid_search(frame, grid, recipe.max_lag(), ctx.config.clip, ctx.threads);
    ensure_output_dir(ctx.config.paths.output_dir);
    csv::write_text_file(ctx.artifact("grid.csv"), grid_csv(result));
    ctx.out << grid_summary(result);
}

void cmd_stack(Context& ctx) {
    const auto [frame, recipe] = load_frame_artifact(ctx);
    const auto rows = training_rows(frame, recipe.max_lag());
    const auto valid_month = resolve_valid_month(ctx.config, frame);
    const auto bases = ctx.config.stack_bases();
    const auto model = fit_stacked(rows, bases, ctx.config.stack.folds, valid_month, ctx.threads);
    for (const auto& w : model.warnings) ctx.err << "stack: warning: " << w << "\n";

    const auto split = split_train_valid(frame, valid_month, recipe.max_lag());
    const auto report = score_predictions(predict_stacked(model, split.valid), split.valid, ctx.config.clip);
    ctx.out << fmt::format("stack: {} bases, {} folds, intercept {:.6f}\n", bases.size(), model.folds,
                           model.meta.intercept);
    for (std::size_t b = 0; b < bases.size(); ++b) {
        const auto base = score_predictions(predict(model.bases[b], split.valid), split.valid, ctx.config.clip);
        ctx.out << fmt::format("  base {} weight {:.6f} valid rmse {:.6f}\n", b, model.meta.weights[b], base.rmse);
    }
    ctx.out << fmt::format("  stacked valid rmse {:.6f} (month {})\n", report.rmse, valid_month);
    ensure_output_dir(ctx.config.paths.output_dir);
    save_artifact(stacked_artifact(model), ctx.artifact("stacked.json"));
}

void cmd_eval(Context& ctx, const std::string& submission_flag, const std::string& truth_flag, bool write_csv) {
    MetricsReport report;
    if (!submission_flag.empty()) {
        const fs::path truth_path = truth_flag.empty() ? ctx.config.paths.truth_file() : fs::path(truth_flag);
        require_artifact(submission_flag, "predict");
        require_artifact(truth_path, "synth");
        const auto submission = load_id_values(submission_flag);
        const auto truth = load_id_values(truth_path);
        if (submission.size() != truth.size())
            throw Error(ErrorKind::Data, fmt::format("submission has {} rows, truth has {}", submission.size(), truth.size()));
        std::vector<double> pred;
        std::vector<double> actual;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (submission[i].first != truth[i].first)
                throw Error(ErrorKind::Data, fmt::format("row {}: submission ID {} does not match truth ID {}", i,
                                                         submission[i].first, truth[i].first));
            pred.push_back(submission[i].second);
            actual.push_back(ctx.config.clip.apply(truth[i].second));
        }
        report = score_predictions(pred, actual, ctx.config.clip);
    } else {
        const auto [frame, recipe] = load_frame_artifact(ctx);
        const auto valid_month = resolve_valid_month(ctx.config, frame);
        const auto split = split_train_valid(frame, valid_month, recipe.max_lag());
        const auto members = fit_mean_ensemble(split.train, ctx.ensemble_spec(), ctx.threads);
        report = score_predictions(predict_mean_ensemble(members, split.valid), split.valid, ctx.config.clip,
                                   &split.train);
        ctx.out << fmt::format("holdout month {}: {} train rows\n", valid_month, split.train.rows());
    }
    ctx.out << format_report(report);
    if (write_csv) {
        ensure_output_dir(ctx.config.paths.output_dir);
        csv::write_text_file(ctx.artifact("metrics.csv"), report_csv(report));
    }
}

void cmd_importance(Context& ctx, const std::string& model_flag) {
    const auto manifest = model_manifest(ctx, model_flag);
    require_artifact(manifest, "train");
    const auto artifact = load_artifact(manifest);
    std::vector<FeatureWeight> total;
    for (const auto& member : artifact.members) {
        const auto weights = feature_importance(member);
        if (total.empty()) total = weights;
        else for (std::size_t f = 0; f < weights.size(); ++f) total[f].weight += weights[f].weight;
    }
    for (auto& w : total) w.weight /= static_cast<double>(artifact.members.size());
    std::stable_sort(total.begin(), total.end(),
                     [](const FeatureWeight& a, const FeatureWeight& b) { return a.weight > b.weight; });
    for (std::size_t i = 0; i < total.size(); ++i)
        ctx.out << fmt::format("{:>3}  {:<24}{:.6f}\n", i + 1, total[i].name, total[i].weight);
}

void add_common(CLI::App* sub, CommonFlags& flags) {
    sub->add_option("-c,--config", flags.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "seed for every random stream (overrides the config)");
    sub->add_option("--threads", flags.threads, fmt::format("worker threads (else ${}, else all cores)", kThreadsEnv));
    sub->add_option("--data", flags.data_dir, "directory of input CSV files");
    sub->add_option("--out", flags.output_dir, "directory for artifacts");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"salesrf: monthly sales forecasting with random forests", "salesrf"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string model_flag;
    std::string submission_flag;
    std::string truth_flag;
    bool write_csv = false;
    std::optional<int> k_flag;

    auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset");
    add_common(synth, flags);
    auto* featurize = app.add_subcommand("featurize", "build the feature frame from sales CSVs");
    add_common(featurize, flags);
    auto* train = app.add_subcommand("train", "fit the seed-averaged forest ensemble");
    add_common(train, flags);
    train->add_option("--model", model_flag, "manifest path (default <out>/ensemble.json)");
    train->add_option("-k,--members", k_flag, "ensemble size (1 = single forest)");
    auto* tune = app.add_subcommand("tune", "grid search on the last training month");
    add_common(tune, flags);
    auto* stack = app.add_subcommand("stack", "fit the out-of-fold stacked model");
    add_common(stack, flags);
    auto* predict_cmd = app.add_subcommand("predict", "write the submission CSV");
    add_common(predict_cmd, flags);
    predict_cmd->add_option("--model", model_flag, "manifest path (default <out>/ensemble.json)");
    predict_cmd->add_option("--submission", submission_flag, "output path (default <out>/submission.csv)");
    auto* eval = app.add_subcommand("eval", "score a submission, or run a holdout evaluation");
    add_common(eval, flags);
    eval->add_option("--submission", submission_flag, "submission CSV to score against the truth file");
    eval->add_option("--truth", truth_flag, "truth CSV (default <data>/truth.csv)");
    eval->add_flag("--csv", write_csv, "also write <out>/metrics.csv");
    eval->add_option("-k,--members", k_flag, "ensemble size for the holdout run");
    auto* importance = app.add_subcommand("importance", "print normalized feature importances");
    add_common(importance, flags);
    importance->add_option("--model", model_flag, "manifest path (default <out>/ensemble.json)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::string message = e.what();
        std::replace(message.begin(), message.end(), '\n', ' ');
        err << "salesrf: error[usage]: " << message << "\n";
        return 2;
    }

    try {
        Context ctx = make_context(flags, out, err);
        if (k_flag) ctx.config.ensemble.k = *k_flag;
        if (*synth) cmd_synth(ctx);
        else if (*featurize) cmd_featurize(ctx);
        else if (*train) cmd_train(ctx, model_flag);
        else if (*tune) cmd_tune(ctx);
        else if (*stack) cmd_stack(ctx);
        else if (*predict_cmd) cmd_predict(ctx, model_flag, submission_flag);
        else if (*eval) cmd_eval(ctx, submission_flag, truth_flag, write_csv);
        else if (*importance) cmd_importance(ctx, model_flag);
    } catch (const Error& e) {
        std::string message = e.what();
        std::replace(message.begin(), message.end(), '\n', ' ');
        err << "salesrf: error[" << to_string(e.kind()) << "]: " << message << "\n";
        return e.kind() == ErrorKind::Usage ? 2 : 1;
    } catch (const std::exception& e) {
        err << "salesrf: error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace salesrf::cli
