#pragma once

// Shared scenario builders for the test suites.

#include "perfcon/scenario.hpp"

namespace perfcon::testsup {

// The two-day accelerated run: 190 thermal samples per day per metric,
// weekly energy cadence, one redemption boundary at the end.
inline scenario_config replication_config(uint64_t seed) {
    scenario_config cfg;
    cfg.seed = seed;
    cfg.actors = {{"owner", 5 * coin},
                  {"building_owner", 5 * coin},
                  {"contractor", 1 * coin},
                  {"facility_manager", 1 * coin},
                  {"backend", 25 * coin}};
    case_params& c = cfg.case_cfg;
    c.building_id = "tz2";
    c.setpoint_ids = {"tz2.sp.1"};
    c.temperature_ids = {"tz2.t.1", "tz2.t.2"};
    c.humidity_ids = {"tz2.rh.1", "tz2.rh.2"};
    c.co2_ids = {"tz2.aq.1", "tz2.aq.2"};
    c.energy_ids = {"tz2.e.1"};
    c.base = baselines{45'000, 21'000, 40'000, 1'000'000};
    c.fm_fee_per_interval = coin / 20;
    c.contractor_fee_per_interval = coin / 20;
    c.thermal_interval_s = 86'400;
    c.energy_interval_s = 604'800;
    c.duration_s = 2 * 86'400;
    c.redemption_interval_s = c.duration_s;  // exactly one payout event
    cfg.sampling.of(metric::temperature) = 455;  // ~190/day
    cfg.sampling.of(metric::humidity) = 455;
    cfg.sampling.of(metric::co2) = 455;
    cfg.sampling.of(metric::energy) = 604'800;

    synthetic_spec spec;
    spec.building_id = "tz2";
    spec.duration_s = c.duration_s;
    spec.metrics[metric::temperature] = metric_synth{21.0, 1.0, 0.3, 300, {"tz2.t.1", "tz2.t.2"}};
    spec.metrics[metric::humidity] = metric_synth{40.0, 5.0, 1.0, 300, {"tz2.rh.1", "tz2.rh.2"}};
    spec.metrics[metric::co2] = metric_synth{900.0, 60.0, 30.0, 300, {"tz2.aq.1", "tz2.aq.2"}};
    spec.metrics[metric::energy] = metric_synth{45.0, 0.0, 2.0, 21'600, {"tz2.e.1"}};
    cfg.dataset.synthetic = spec;
    cfg.report_gas_price_gigaunits = 89.8;
    cfg.report_fiat_rate = 322.5;
    return cfg;
}

// Randomized scenario for conservation and equivalence drills: varied
// cadences, baselines deliberately off-target to hit every tier, optional
// mid-run deactivation.
inline scenario_config random_scenario(rng& g, bool allow_deactivation, int64_t fixed_duration_s = 0) {
    scenario_config cfg;
    cfg.seed = g.next();
    cfg.actors = {{"owner", 50 * coin},
                  {"building_owner", 300 * coin},
                  {"contractor", 5 * coin},
                  {"facility_manager", 5 * coin},
                  {"backend", 150 * coin}};
    case_params& c = cfg.case_cfg;
    c.building_id = "drill";
    c.temperature_ids = {"t.1", "t.2"};
    c.humidity_ids = {"rh.1"};
    c.co2_ids = {"aq.1", "aq.2"};
    c.energy_ids = {"e.1"};
    c.base = baselines{45'000, 21'000, 40'000, 1'000'000};
    c.thermal_interval_s = g.range(1, 8) * 3'600;
    c.energy_interval_s = c.thermal_interval_s * g.range(1, 5);
    c.duration_s = fixed_duration_s > 0 ? fixed_duration_s : g.range(12, 48) * 3'600;
    c.redemption_interval_s = std::max(c.thermal_interval_s, c.duration_s / g.range(1, 3));
    c.fm_fee_per_interval = (coin / 1000) * g.range(1, 50);
    c.contractor_fee_per_interval = (coin / 1000) * g.range(1, 50);
    const rational fractions[] = {{1, 2}, {1, 3}, {2, 5}, {3, 4}};
    c.reduced_fraction = fractions[g.below(4)];

    cfg.sampling.of(metric::temperature) = std::max<int64_t>(60, c.thermal_interval_s / g.range(3, 10));
    cfg.sampling.of(metric::humidity) = std::max<int64_t>(60, c.thermal_interval_s / g.range(3, 10));
    cfg.sampling.of(metric::co2) = std::max<int64_t>(60, c.thermal_interval_s / g.range(3, 10));
    cfg.sampling.of(metric::energy) = std::max<int64_t>(60, c.energy_interval_s / g.range(1, 3));

    synthetic_spec spec;
    spec.building_id = "drill";
    spec.duration_s = c.duration_s;
    auto base_near = [&](double target, double lo_f, double hi_f) {
        return target * static_cast<double>(g.range(static_cast<int64_t>(lo_f * 100), static_cast<int64_t>(hi_f * 100))) / 100.0;
    };
    spec.metrics[metric::temperature] = metric_synth{base_near(21.0, 0.7, 1.3), 1.0, 0.3, 600, {"t.1", "t.2"}};
    spec.metrics[metric::humidity] = metric_synth{base_near(40.0, 0.3, 2.0), 3.0, 1.0, 600, {"rh.1"}};
    spec.metrics[metric::co2] = metric_synth{base_near(1000.0, 0.5, 1.5), 50.0, 30.0, 600, {"aq.1", "aq.2"}};
    spec.metrics[metric::energy] = metric_synth{base_near(45.0, 0.4, 2.0), 0.0, 2.0, 1'800, {"e.1"}};
    cfg.dataset.synthetic = spec;

    if (allow_deactivation && g.below(3) == 0)
        cfg.deactivate_at_s = c.start_time_s + c.duration_s * g.range(10, 90) / 100;
    return cfg;
}

}  // namespace perfcon::testsup
