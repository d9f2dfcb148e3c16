#include "salesrf/synth.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "salesrf/error.hpp"
#include "salesrf/rng.hpp"

namespace salesrf {

namespace {

constexpr double kShopSigma = 0.4;
constexpr double kPairSigma = 0.4;

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return month == 2 && leap ? 29 : kDays[month - 1];
}

double log_normal_unit_mean(Rng& rng, double sigma) {
    return std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
}

}  // namespace

void SynthConfig::validate() const {
    if (n_shops < 1 || n_items < 1 || n_categories < 1)
        throw Error(ErrorKind::Config, "synth: n_shops, n_items and n_categories must be >= 1");
    if (n_months < 14)
        throw Error(ErrorKind::Config,
                    fmt::format("synth: n_months must be >= 14, got {}", n_months));
    if (!(base_rate > 0.0)) throw Error(ErrorKind::Config, "synth: base_rate must be > 0");
    if (!(seasonal_amplitude >= 0.0 && seasonal_amplitude <= 1.0))
        throw Error(ErrorKind::Config, "synth: seasonal_amplitude must lie in [0,1]");
    if (!(trend > 0.0)) throw Error(ErrorKind::Config, "synth: trend must be > 0");
    if (!(affinity_sigma >= 0.0)) throw Error(ErrorKind::Config, "synth: affinity_sigma must be >= 0");
}

double synth_monthly_mean(const SynthConfig& cfg, double affinity, MonthIndex month) {
    const double season =
        1.0 + cfg.seasonal_amplitude * std::sin(2.0 * std::numbers::pi * (month % 12) / 12.0);
    return cfg.base_rate * season * std::pow(cfg.trend, month) * affinity;
}

SynthData generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    SynthData data;

    for (CategoryId c = 0; c < cfg.n_categories; ++c) data.catalog.categories.insert(c);
    for (ShopId s = 0; s < cfg.n_shops; ++s) data.catalog.shops.insert(s);
    for (ItemId i = 0; i < cfg.n_items; ++i) data.catalog.items.emplace(i, i % cfg.n_categories);

    Rng structure(derive_seed(cfg.noise_seed, 0));
    std::vector<double> shop_factor(cfg.n_shops);
    std::vector<double> item_factor(cfg.n_items);
    std::vector<double> item_price(cfg.n_items);
    for (auto& f : shop_factor) f = log_normal_unit_mean(structure, kShopSigma);
    for (ItemId i = 0; i < cfg.n_items; ++i) {
        item_factor[i] = log_normal_unit_mean(structure, cfg.affinity_sigma);
        item_price[i] = std::round(std::exp(5.5 + structure.normal()) * 100.0) / 100.0 + 1.0;
    }
    data.affinity.resize(static_cast<std::size_t>(cfg.n_shops) * cfg.n_items);
    for (ShopId s = 0; s < cfg.n_shops; ++s) {
        for (ItemId i = 0; i < cfg.n_items; ++i) {
            data.affinity[static_cast<std::size_t>(s) * cfg.n_items + i] =
                shop_factor[s] * item_factor[i] * log_normal_unit_mean(structure, kPairSigma);
        }
    }

    Rng noise(derive_seed(cfg.noise_seed, 1));
    Rng price_noise(derive_seed(cfg.noise_seed, 2));
    std::vector<double> month_total(data.affinity.size());

    for (MonthIndex m = 0; m <= cfg.n_months; ++m) {
        const int year = 2013 + m / 12;
        const int month = m % 12 + 1;
        const int days = days_in_month(year, month);
        const bool is_target = m == cfg.n_months;
        std::fill(month_total.begin(), month_total.end(), 0.0);
        for (int day = 1; day <= days; ++day) {
            for (ShopId s = 0; s < cfg.n_shops; ++s) {
                for (ItemId i = 0; i < cfg.n_items; ++i) {
                    const std::size_t cell = static_cast<std::size_t>(s) * cfg.n_items + i;
                    const double daily = synth_monthly_mean(cfg, data.affinity[cell], m) / days;
                    const auto count = noise.poisson(daily);
                    if (count == 0) continue;
                    month_total[cell] += static_cast<double>(count);
                    if (is_target) continue;
                    const double jitter = 1.0 + 0.05 * price_noise.normal();
                    DailySaleRecord r;
                    r.date = CalendarDate{year, month, day};
                    r.month_index = m;
                    r.shop_id = s;
                    r.item_id = i;
                    r.item_price = std::max(0.01, std::round(item_price[i] * jitter * 100.0) / 100.0);
                    r.item_cnt_day = static_cast<double>(count);
                    data.sales.push_back(r);
                }
            }
        }
        if (is_target) {
            data.test.target_month = m;
            std::int64_t row_id = 0;
            for (ShopId s = 0; s < cfg.n_shops; ++s) {
                for (ItemId i = 0; i < cfg.n_items; ++i) {
                    data.test.rows.push_back(TestRow{row_id++, s, i});
                    data.truth[{s, i}] = month_total[static_cast<std::size_t>(s) * cfg.n_items + i];
                }
            }
        }
    }
    return data;
}

}  // namespace salesrf
