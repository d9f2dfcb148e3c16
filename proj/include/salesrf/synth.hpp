#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "salesrf/types.hpp"

namespace salesrf {

/// Seeded generator of a sales history with known intensity.
///
/// For shop s, item i and month m the expected monthly count is
///
///     base_rate * (1 + seasonal_amplitude * sin(2*pi*(m mod 12)/12)) * trend^m * affinity(s,i)
///
/// and each day of the month draws a Poisson count with that mean divided by
/// the number of days in the month. Affinities are log-normal with mean one:
/// an item factor (log-sd `affinity_sigma`), a shop factor and a pair factor
/// (log-sd 0.4 each). Simulation runs for n_months + 1 months; the final month
/// is withheld as the test target.
struct SynthConfig {
    std::int32_t n_shops = 20;
    std::int32_t n_items = 200;
    std::int32_t n_categories = 10;
    std::int32_t n_months = 24;
    double base_rate = 2.0;
    double seasonal_amplitude = 0.3;
    double trend = 1.0;
    double affinity_sigma = 1.0;
    std::uint64_t noise_seed = 42;

    /// Throws ErrorKind::Config when an invariant does not hold.
    void validate() const;
};

struct SynthData {
    DailySalesTable sales;
    Catalog catalog;
    TestSet test;
    /// Realized total count at test.target_month for every test pair.
    std::map<std::pair<ShopId, ItemId>, double> truth;
    /// affinity[shop * n_items + item]
    std::vector<double> affinity;
};

double synth_monthly_mean(const SynthConfig& cfg, double affinity, MonthIndex month);

SynthData generate_synthetic(const SynthConfig& cfg);

}  // namespace salesrf
