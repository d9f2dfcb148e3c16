#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "salesrf/featurize.hpp"
#include "salesrf/frame.hpp"

namespace salesrf {

struct MetricsReport {
    double rmse = 0.0;
    double r_squared = 0.0;  // NaN when the actuals are constant
    std::map<std::string, double> baselines;
    std::size_t n = 0;
    ClipRange clip;
};

double rmse(std::span<const double> pred, std::span<const double> actual);

/// 1 - SSE/SST. Throws when actual is constant or shorter than two.
double r_squared(std::span<const double> pred, std::span<const double> actual);

/// "global_mean": the training target mean; "last_month": each row's lag_1
/// column (0 when the frame has none). Both are clipped before scoring.
std::map<std::string, double> baselines(const FeatureFrame& train, const FeatureFrame& valid,
                                        ClipRange clip = {});

/// Clips predictions, then scores against the valid frame's targets.
MetricsReport score_predictions(std::span<const double> pred, const FeatureFrame& valid,
                                ClipRange clip, const FeatureFrame* train = nullptr);

/// Same, against an explicit vector of actuals.
MetricsReport score_predictions(std::span<const double> pred, std::span<const double> actual,
                                ClipRange clip);

std::string format_report(const MetricsReport& report);
std::string report_csv(const MetricsReport& report);

}  // namespace salesrf
