#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perfcon/data.hpp"
#include "perfcon/metric.hpp"
#include "perfcon/simulation.hpp"
#include "perfcon/util.hpp"

namespace perfcon {

/// Randomized sampling plan: per metric, consecutive poll times are spaced by
/// a uniform draw from [m/2, 3m/2] around the mean interval m, so gaps are
/// bounded and the long-run rate matches the mean. Each metric gets its own
/// stream split from the master seed; adding a metric never perturbs the
/// others' schedules.
struct sampling_policy {
    std::array<int64_t, 4> mean_interval_s = {17'280, 17'280, 17'280, 604'800};
    uint64_t seed = 0;

    int64_t of(metric m) const { return mean_interval_s[metric_index(m)]; }
    int64_t& of(metric m) { return mean_interval_s[metric_index(m)]; }

    bool valid() const {
        for (int64_t v : mean_interval_s)
            if (v <= 0)
                return false;
        return true;
    }

    /// Thermal metrics five times a day, energy weekly (the implemented case).
    static sampling_policy five_per_day(uint64_t seed = 0) { return sampling_policy{{17'280, 17'280, 17'280, 604'800}, seed}; }

    /// Thermal metrics every 15 minutes on average (the scenario description).
    static sampling_policy every_15_minutes(uint64_t seed = 0) { return sampling_policy{{900, 900, 900, 604'800}, seed}; }

    friend bool operator==(const sampling_policy&, const sampling_policy&) = default;
};

struct schedule_event {
    int64_t time = 0;
    metric kind = metric::temperature;

    friend bool operator==(const schedule_event&, const schedule_event&) = default;
};

struct schedule {
    std::vector<schedule_event> events;  // globally time-ordered

    friend bool operator==(const schedule&, const schedule&) = default;
};

inline int64_t jitter_lo(int64_t mean) { return (mean + 1) / 2; }
inline int64_t jitter_hi(int64_t mean) { return mean + mean / 2; }

inline schedule plan_schedule(const sampling_policy& policy, int64_t start, int64_t duration) {
    if (duration <= 0)
        throw error("plan_schedule: duration must be positive");
    if (!policy.valid())
        throw error("plan_schedule: mean intervals must be positive");
    schedule s;
    for (metric m : all_metrics) {
        rng stream(derive_seed(policy.seed, metric_index(m), 1));
        int64_t mean = policy.of(m);
        int64_t t = start;
        for (;;) {
            t += stream.range(jitter_lo(mean), jitter_hi(mean));
            if (t > start + duration)
                break;
            s.events.push_back({t, m});
        }
    }
    std::stable_sort(s.events.begin(), s.events.end(), [](const schedule_event& a, const schedule_event& b) {
        if (a.time != b.time)
            return a.time < b.time;
        return metric_index(a.kind) < metric_index(b.kind);
    });
    return s;
}

/// Uniform draw out of the registered sensor list.
inline const std::string& select_sensor(const std::vector<std::string>& registered, rng& gen) {
    if (registered.empty())
        throw error("select_sensor: empty sensor list");
    return registered[gen.below(registered.size())];
}

struct submission_report {
    int64_t planned = 0;
    int64_t submitted = 0;
    int64_t rejected = 0;
    int64_t skipped = 0;  // dataset gap at the event time
    std::array<int64_t, 4> planned_by_metric{};
    std::array<int64_t, 4> submitted_by_metric{};
    std::array<int64_t, 4> rejected_by_metric{};
    std::array<int64_t, 4> skipped_by_metric{};

    friend bool operator==(const submission_report&, const submission_report&) = default;
};

/// Walks the schedule in time order: pick a random registered sensor, read
/// the series value at or before the event time, round to 3 decimals (series
/// values already are exact milli), and submit as a fee-bearing transaction.
/// Rejections are recorded, never retried; dataset gaps skip the event.
/// before_event fires with each event's time before it is processed, letting
/// a driver interleave clock-driven actions (redemptions, deactivation).
inline submission_report run_oracle(simulation& sim, const address& backend, const schedule& plan,
                                    const building_dataset& data, uint64_t seed,
                                    const std::function<void(int64_t)>& before_event = {}) {
    const performance_contract* pc = sim.contract();
    if (!pc || !pc->active_case())
        throw error("run_oracle: no active case");
    const case_params& c = *pc->active_case();

    std::array<rng, 4> pick = {rng(derive_seed(seed, 0, 2)), rng(derive_seed(seed, 1, 2)),
                               rng(derive_seed(seed, 2, 2)), rng(derive_seed(seed, 3, 2))};
    submission_report rep;
    for (const schedule_event& ev : plan.events) {
        if (before_event)
            before_event(ev.time);
        size_t mi = metric_index(ev.kind);
        rep.planned += 1;
        rep.planned_by_metric[mi] += 1;
        const std::string& sensor = select_sensor(c.ids_of(ev.kind), pick[mi]);
        auto sit = data.series.find(sensor);
        std::optional<int64_t> value =
            sit == data.series.end() ? std::nullopt : sample_at(sit->second, ev.time);
        if (!value) {
            rep.skipped += 1;
            rep.skipped_by_metric[mi] += 1;
            continue;
        }
        if (ev.time > sim.led().clock())
            sim.led().set_clock(ev.time);
        measurement m{1, ev.kind, sensor, ev.time, *value};
        receipt r = sim.submit_measurement(backend, m);
        if (r.accepted) {
            rep.submitted += 1;
            rep.submitted_by_metric[mi] += 1;
        } else {
            rep.rejected += 1;
            rep.rejected_by_metric[mi] += 1;
        }
    }
    return rep;
}

}  // namespace perfcon
