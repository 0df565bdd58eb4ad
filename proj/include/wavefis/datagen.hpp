#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "wavefis/errors.hpp"
#include "wavefis/rng.hpp"
#include "wavefis/series.hpp"

namespace wavefis {

/// Fraud-episode disturbance parameters: a spend spike while the episode is
/// active, then a reduced-consumption recovery stretch during which the
/// revolving balance drifts upward.
struct ShockConfig {
    double spend_spike_factor = 3.0;  // >= 1
    double post_drop_factor = 0.55;   // (0, 1]
    int recovery_days = 28;
    double debt_drift = 12.0;  // USD/day of extra balance growth while recovering
};

struct GenConfig {
    int n_households = 100;
    int n_days = 180;
    double fraud_rate = 0.15;  // fraction of households with at least one episode
    double income_low = 50000.0;
    double income_high = 150000.0;
    uint64_t seed = 0;
    ShockConfig shock;

    void validate() const {
        if (n_households < 1) fail(Errc::invalid_config, "n_households must be >= 1");
        if (n_days < 60) fail(Errc::invalid_config, "n_days must be >= 60");
        if (!(fraud_rate >= 0.0 && fraud_rate < 1.0))
            fail(Errc::invalid_config, "fraud_rate must lie in [0,1)");
        if (!(income_low < income_high))
            fail(Errc::invalid_config, "income band must satisfy low < high");
        if (shock.spend_spike_factor < 1.0)
            fail(Errc::invalid_config, "spend_spike_factor must be >= 1");
        if (!(shock.post_drop_factor > 0.0 && shock.post_drop_factor <= 1.0))
            fail(Errc::invalid_config, "post_drop_factor must lie in (0,1]");
        if (shock.recovery_days < 0) fail(Errc::invalid_config, "recovery_days must be >= 0");
        if (shock.debt_drift < 0.0) fail(Errc::invalid_config, "debt_drift must be >= 0");
    }
};

struct FraudEvent {
    int start_day = 0;
    int duration = 0;
};

/// One household's daily panel. Channel order is fixed; see
/// panel_channel_names().
struct HouseholdPanel {
    std::string household_id;
    Matrix values;            // n_days x 5
    std::vector<int> labels;  // per-day fraud ground truth, 0/1
    std::vector<FraudEvent> fraud_events;
    double income = 0.0;  // USD/year; 0 when loaded from CSV
};

inline const std::vector<std::string>& panel_channel_names() {
    static const std::vector<std::string> names{"spend_total", "txn_count", "revolving_balance",
                                                "credit_utilization", "fraud_alert"};
    return names;
}

enum PanelChannel { kSpend = 0, kTxnCount = 1, kBalance = 2, kUtilization = 3, kAlert = 4 };

namespace detail {

// Internal generator constants. Incomes scale the spend level; the balance
// follows a mean-reverting carry process that the recovery phase perturbs.
// Spending clusters into calm and turbulent stretches: a slow two-state chain
// scales the spend level (and with it the dollar volatility) during
// turbulent weeks, so realized volatility is persistent.
inline constexpr double kSpendShare = 0.55;        // of income/365
inline constexpr double kSpendSigma = 0.32;        // lognormal sigma of daily spend
inline constexpr double kTurbulentLevel = 6.0;     // spend multiplier, turbulent regime
inline constexpr double kCalmToTurbulent = 0.0075;   // daily transition probabilities
inline constexpr double kTurbulentToCalm = 0.0075;
inline constexpr double kAvgTicket = 45.0;         // USD per transaction
inline constexpr double kCarryRate = 0.30;         // baseline spend carried to balance
inline constexpr double kTurbCarryRate = 0.06;     // planned splurges mostly paid off
inline constexpr double kFraudCarryRate = 0.04;    // disputed charges partially post
inline constexpr double kRepayRate = 0.05;         // daily balance repayment fraction
inline constexpr double kRecoveryRepayRate = 0.015;
inline constexpr double kCreditLimitShare = 0.04;  // of yearly income
inline constexpr double kBalanceNoise = 0.02;      // of daily spend level

inline const double kWeekMult[7] = {0.96, 0.97, 0.99, 1.00, 1.04, 1.12, 1.06};

inline std::vector<FraudEvent> draw_episodes(Rng& rng, int n_days, int recovery_days) {
    const int n_episodes = 1 + static_cast<int>(rng.index(2));
    std::vector<FraudEvent> events;
    for (int e = 0; e < n_episodes; ++e) {
        const int duration = 8 + static_cast<int>(rng.index(7));  // 8..14 days
        const int last_start = n_days - duration - 15;
        if (last_start <= 15) break;
        for (int attempt = 0; attempt < 50; ++attempt) {
            const int start = 15 + static_cast<int>(rng.index(last_start - 15 + 1));
            bool clear = true;
            for (const FraudEvent& other : events) {
                const int gap_before = other.start_day - (start + duration);
                const int gap_after = start - (other.start_day + other.duration);
                if (std::max(gap_before, gap_after) < recovery_days + 5) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                events.push_back({start, duration});
                break;
            }
        }
    }
    std::sort(events.begin(), events.end(),
              [](const FraudEvent& a, const FraudEvent& b) { return a.start_day < b.start_day; });
    return events;
}

}  // namespace detail

/// Seeded synthetic household panels with injected fraud shocks. A pure
/// function of the config: households derive independent seeds, so the
/// sequential loop and any parallel schedule produce identical output.
inline std::vector<HouseholdPanel> generate(const GenConfig& config) {
    config.validate();
    std::vector<HouseholdPanel> panels;
    panels.reserve(config.n_households);

    for (int h = 0; h < config.n_households; ++h) {
        Rng rng(splitmix64(config.seed ^ ((static_cast<uint64_t>(h) + 1) *
                                          0x9e3779b97f4a7c15ULL)));
        HouseholdPanel panel;
        {
            char buf[16];
            std::snprintf(buf, sizeof buf, "h%05d", h);
            panel.household_id = buf;
        }
        panel.income = rng.uniform(config.income_low, config.income_high);
        panel.values = Matrix(config.n_days, 5);
        panel.labels.assign(config.n_days, 0);

        const double daily_level = panel.income / 365.0 * detail::kSpendShare;
        const double mu_log =
            std::log(daily_level) - detail::kSpendSigma * detail::kSpendSigma / 2.0;
        const double credit_limit = detail::kCreditLimitShare * panel.income;

        const bool fraud_household = rng.uniform01() < config.fraud_rate;
        if (fraud_household)
            panel.fraud_events =
                detail::draw_episodes(rng, config.n_days, config.shock.recovery_days);

        auto episode_at = [&](int day) -> const FraudEvent* {
            for (const FraudEvent& e : panel.fraud_events)
                if (day >= e.start_day && day < e.start_day + e.duration) return &e;
            return nullptr;
        };
        auto recovering_at = [&](int day) {
            for (const FraudEvent& e : panel.fraud_events) {
                const int end = e.start_day + e.duration;
                if (day >= end && day < end + config.shock.recovery_days && !episode_at(day))
                    return true;
            }
            return false;
        };

        double balance = 6.0 * daily_level * (1.0 + 0.1 * rng.normal());
        bool turbulent = rng.uniform01() < detail::kCalmToTurbulent /
                                               (detail::kCalmToTurbulent +
                                                detail::kTurbulentToCalm);
        for (int t = 0; t < config.n_days; ++t) {
            if (turbulent) {
                if (rng.uniform01() < detail::kTurbulentToCalm) turbulent = false;
            } else {
                if (rng.uniform01() < detail::kCalmToTurbulent) turbulent = true;
            }
            const double regime_level = turbulent ? detail::kTurbulentLevel : 1.0;
            const double base = regime_level * rng.lognormal(mu_log, detail::kSpendSigma) *
                                detail::kWeekMult[t % 7];
            const bool in_episode = episode_at(t) != nullptr;
            const bool in_recovery = !in_episode && recovering_at(t);

            double organic = base, fraud_extra = 0.0;
            if (in_episode) {
                fraud_extra = (config.shock.spend_spike_factor - 1.0) * base;
            } else if (in_recovery) {
                organic = config.shock.post_drop_factor * base;
            }
            const double spend = organic + fraud_extra;
            const double txn = static_cast<double>(
                rng.poisson(std::max(0.3, spend / detail::kAvgTicket)));

            const double repay_rate =
                in_recovery ? detail::kRecoveryRepayRate : detail::kRepayRate;
            balance += detail::kCarryRate * organic + detail::kFraudCarryRate * fraud_extra -
                       repay_rate * balance +
                       detail::kBalanceNoise * daily_level * rng.normal();
            if (in_recovery) balance += config.shock.debt_drift;
            balance = std::max(0.0, balance);

            panel.values(t, kSpend) = spend;
            panel.values(t, kTxnCount) = txn;
            panel.values(t, kBalance) = balance;
            panel.values(t, kUtilization) = std::clamp(balance / credit_limit, 0.0, 1.0);
            panel.values(t, kAlert) = in_episode ? 1.0 : 0.0;
            panel.labels[t] = in_episode ? 1 : 0;
        }
        panels.push_back(std::move(panel));
    }
    return panels;
}

/// Standardizes each household's channels independently, then emits sliding
/// supervised windows. Classification targets flag any fraud label inside the
/// horizon; regression targets are the sample standard deviation of the
/// (standardized) target channel over the horizon.
inline WindowDataset to_dataset(const std::vector<HouseholdPanel>& panels, int window, int horizon,
                                Task task, int dyadic_depth,
                                const std::vector<std::string>& channel_names,
                                const std::string& regression_channel) {
    if (panels.empty()) fail(Errc::no_valid_windows, "no panels");
    if (task == Task::regression && horizon < 2)
        fail(Errc::invalid_config, "regression horizon must be >= 2 (volatility of one point)");

    WindowDataset dataset;
    dataset.channel_names = channel_names;
    dataset.window = window;
    dataset.horizon = horizon;
    dataset.task = task;
    dataset.target_channel = task == Task::classification ? "fraud_label" : regression_channel;

    int target_col = -1;
    if (task == Task::regression) {
        for (size_t c = 0; c < channel_names.size(); ++c)
            if (channel_names[c] == regression_channel) target_col = static_cast<int>(c);
        if (target_col < 0)
            fail(Errc::invalid_config, "unknown target channel '" + regression_channel + "'");
    }

    const int d = static_cast<int>(channel_names.size());
    for (size_t p = 0; p < panels.size(); ++p) {
        const HouseholdPanel& panel = panels[p];
        const int n_days = panel.values.rows();
        if (panel.values.cols() != d)
            fail(Errc::dimension_mismatch, "panel channel count does not match names");
        check_window_shape(n_days, window, horizon, dyadic_depth);
        if (static_cast<int>(panel.labels.size()) != n_days)
            fail(Errc::dimension_mismatch, "panel labels do not cover every day");

        const EconomicSeries series = validate_series(panel.values, channel_names, 0, "1d");
        const EconomicSeries standardized = standardize(series).series;

        const int count = n_days - window - horizon + 1;
        for (int i = 0; i < count; ++i) {
            Matrix vals(window, d);
            for (int r = 0; r < window; ++r)
                for (int c = 0; c < d; ++c) vals(r, c) = standardized.values(i + r, c);

            double target;
            if (task == Task::classification) {
                int label = 0;
                for (int hh = 0; hh < horizon; ++hh)
                    label = std::max(label, panel.labels[i + window + hh]);
                target = static_cast<double>(label);
            } else {
                double mean = 0.0;
                for (int hh = 0; hh < horizon; ++hh)
                    mean += standardized.values(i + window + hh, target_col);
                mean /= horizon;
                double ss = 0.0;
                for (int hh = 0; hh < horizon; ++hh) {
                    const double dev = standardized.values(i + window + hh, target_col) - mean;
                    ss += dev * dev;
                }
                target = std::sqrt(ss / (horizon - 1));
            }

            dataset.windows.push_back(SupervisedWindow{
                EconomicSeries{std::move(vals), dataset.channel_names, i, "1d"}, target});
            dataset.meta.push_back(WindowMeta{panel.household_id, i});
        }
    }
    if (dataset.windows.empty()) fail(Errc::no_valid_windows, "no windows produced");
    return dataset;
}

inline WindowDataset to_dataset(const std::vector<HouseholdPanel>& panels, int window, int horizon,
                                Task task, int dyadic_depth) {
    return to_dataset(panels, window, horizon, task, dyadic_depth, panel_channel_names(),
                      "spend_total");
}

}  // namespace wavefis
