#include "salesrf/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "salesrf/csv.hpp"
#include "salesrf/error.hpp"

namespace salesrf {

namespace {

std::vector<double> targets_of(const FeatureFrame& frame) {
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        if (!frame.has_target(r))
            throw Error(ErrorKind::Data, fmt::format("row {} has no target to score against", r));
    }
    return frame.target;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size())
        throw Error(ErrorKind::Data, fmt::format("rmse: length mismatch ({} predictions, {} actuals)",
                                                 pred.size(), actual.size()));
    if (pred.empty()) throw Error(ErrorKind::Data, "rmse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(pred.size()));
}

double r_squared(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size())
        throw Error(ErrorKind::Data, fmt::format("r_squared: length mismatch ({} predictions, {} actuals)",
                                                 pred.size(), actual.size()));
    if (actual.size() < 2) throw Error(ErrorKind::Data, "r_squared: needs at least two values");
    double mean = 0.0;
    for (const double a : actual) mean += a;
    mean /= static_cast<double>(actual.size());
    double sse = 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sse += (pred[i] - actual[i]) * (pred[i] - actual[i]);
        sst += (actual[i] - mean) * (actual[i] - mean);
    }
    if (sst == 0.0) throw Error(ErrorKind::Data, "r_squared: undefined for constant actuals");
    return 1.0 - sse / sst;
}

std::map<std::string, double> baselines(const FeatureFrame& train, const FeatureFrame& valid,
                                        ClipRange clip) {
    const auto train_y = targets_of(train);
    const auto valid_y = targets_of(valid);
    if (train_y.empty()) throw Error(ErrorKind::Data, "baselines: empty training frame");
    double mean = 0.0;
    for (const double y : train_y) mean += y;
    mean /= static_cast<double>(train_y.size());

    std::vector<double> global(valid.rows(), clip.apply(mean));
    std::vector<double> last(valid.rows(), clip.apply(0.0));
    if (const auto* lag = valid.find_feature("lag_1"); lag != nullptr) {
        for (std::size_t r = 0; r < valid.rows(); ++r) last[r] = clip.apply((*lag)[r]);
    }
    return {{"global_mean", rmse(global, valid_y)}, {"last_month", rmse(last, valid_y)}};
}

MetricsReport score_predictions(std::span<const double> pred, std::span<const double> actual,
                                ClipRange clip) {
    if (pred.size() != actual.size())
        throw Error(ErrorKind::Data, fmt::format("score: {} predictions for {} rows", pred.size(), actual.size()));
    std::vector<double> clipped(pred.begin(), pred.end());
    for (auto& p : clipped) p = clip.apply(p);
    MetricsReport report;
    report.clip = clip;
    report.n = pred.size();
    report.rmse = rmse(clipped, actual);
    try {
        report.r_squared = r_squared(clipped, actual);
    } catch (const Error&) {
        report.r_squared = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

MetricsReport score_predictions(std::span<const double> pred, const FeatureFrame& valid,
                                ClipRange clip, const FeatureFrame* train) {
    const auto actual = targets_of(valid);
    auto report = score_predictions(pred, std::span<const double>(actual), clip);
    if (train != nullptr) report.baselines = baselines(*train, valid, clip);
    return report;
}

std::string format_report(const MetricsReport& report) {
    std::string out;
    out += fmt::format("{:<22}{}\n", "rows", report.n);
    out += fmt::format("{:<22}[{}, {}]\n", "clip", report.clip.lo, report.clip.hi);
    out += fmt::format("{:<22}{:.6f}\n", "rmse", report.rmse);
    out += fmt::format("{:<22}{:.6f}\n", "r_squared", report.r_squared);
    for (const auto& [name, value] : report.baselines)
        out += fmt::format("{:<22}{:.6f}\n", "baseline " + name, value);
    return out;
}

std::string report_csv(const MetricsReport& report) {
    std::string header = "n,clip_lo,clip_hi,rmse,r_squared";
    std::string row = fmt::format("{},{},{},{},{}", report.n, csv::format_double(report.clip.lo),
                                  csv::format_double(report.clip.hi), csv::format_double(report.rmse),
                                  csv::format_double(report.r_squared));
    for (const auto& [name, value] : report.baselines) {
        header += ",baseline_" + name;
        row += "," + csv::format_double(value);
    }
    return header + "\n" + row + "\n";
}

}  // namespace salesrf
