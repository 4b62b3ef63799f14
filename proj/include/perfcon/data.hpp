#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "perfcon/metric.hpp"
#include "perfcon/util.hpp"

namespace perfcon {

struct data_error : error {
    using error::error;
};

/// One sensor's time series. Timestamps are strictly increasing Unix seconds;
/// values are exact 3-decimal fixed point within the metric's physical range.
struct sensor_series {
    std::string sensor_id;
    metric kind = metric::temperature;
    std::vector<std::pair<int64_t, int64_t>> samples;  // (timestamp, value_milli)

    friend bool operator==(const sensor_series&, const sensor_series&) = default;
};

struct building_dataset {
    std::string building_id;
    std::map<std::string, sensor_series> series;

    friend bool operator==(const building_dataset&, const building_dataset&) = default;
};

/// Latest value at or before t (last observation carried forward).
inline std::optional<int64_t> sample_at(const sensor_series& s, int64_t t) {
    auto it = std::upper_bound(s.samples.begin(), s.samples.end(), t,
                               [](int64_t lhs, const auto& rhs) { return lhs < rhs.first; });
    if (it == s.samples.begin())
        return std::nullopt;  // t before the first sample
    return std::prev(it)->second;
}

inline void validate_series(const sensor_series& s) {
    int64_t prev = 0;
    bool first = true;
    for (const auto& [ts, v] : s.samples) {
        if (!first && ts <= prev)
            throw data_error("sensor " + s.sensor_id + ": non-increasing timestamp at " + std::to_string(ts));
        if (!value_in_range(s.kind, v))
            throw data_error("sensor " + s.sensor_id + ": value " + format_milli(v) + " out of range for " +
                             std::string(metric_name(s.kind)));
        prev = ts;
        first = false;
    }
}

inline void validate_dataset(const building_dataset& d) {
    for (const auto& [id, s] : d.series) {
        if (id != s.sensor_id)
            throw data_error("dataset: series key does not match sensor id " + s.sensor_id);
        validate_series(s);
    }
}

// --- CSV codec ---------------------------------------------------------------
// Schema (exact): header "timestamp,sensor_id,metric,value"; timestamp as
// integer Unix seconds; metric in {temperature, humidity, co2, energy}; value
// with up to 3 fractional digits, dot separator.

inline building_dataset load_csv(std::istream& in, std::string building_id = "") {
    building_dataset d;
    d.building_id = std::move(building_id);
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line))
        throw data_error("csv: empty input");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "timestamp,sensor_id,metric,value")
        throw data_error("csv line 1: bad header, expected timestamp,sensor_id,metric,value");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fail = [&](const std::string& what) -> data_error {
            return data_error("csv line " + std::to_string(line_no) + ": " + what);
        };
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        size_t c3 = c2 == std::string::npos ? std::string::npos : line.find(',', c2 + 1);
        if (c3 == std::string::npos || line.find(',', c3 + 1) != std::string::npos)
            throw fail("expected 4 comma-separated fields");
        std::string ts_s = line.substr(0, c1);
        std::string id = line.substr(c1 + 1, c2 - c1 - 1);
        std::string metric_s = line.substr(c2 + 1, c3 - c2 - 1);
        std::string value_s = line.substr(c3 + 1);

        int64_t ts;
        try {
            ts = static_cast<int64_t>(parse_int128(ts_s));
        } catch (const error&) {
            throw fail("bad timestamp '" + ts_s + "'");
        }
        if (id.empty())
            throw fail("empty sensor id");
        auto m = parse_metric(metric_s);
        if (!m)
            throw fail("unknown metric '" + metric_s + "'");
        int64_t v;
        try {
            v = parse_milli(value_s);
        } catch (const error& e) {
            throw fail(std::string("bad value: ") + e.what());
        }
        if (!value_in_range(*m, v))
            throw fail("value " + value_s + " out of range for " + metric_s);

        auto [it, inserted] = d.series.try_emplace(id);
        sensor_series& s = it->second;
        if (inserted) {
            s.sensor_id = id;
            s.kind = *m;
        } else if (s.kind != *m) {
            throw fail("sensor " + id + " changes metric");
        }
        if (!s.samples.empty() && ts <= s.samples.back().first)
            throw fail("sensor " + id + ": timestamp " + std::to_string(ts) + " not increasing");
        s.samples.emplace_back(ts, v);
    }
    return d;
}

inline building_dataset load_csv_file(const std::string& path, std::string building_id = "") {
    std::ifstream in(path);
    if (!in)
        throw data_error("cannot open " + path);
    try {
        return load_csv(in, std::move(building_id));
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

inline void write_csv(std::ostream& out, const building_dataset& d) {
    out << "timestamp,sensor_id,metric,value\n";
    // Rows sorted by (timestamp, sensor_id) so output is canonical.
    std::vector<std::tuple<int64_t, const std::string*, metric, int64_t>> rows;
    for (const auto& [id, s] : d.series)
        for (const auto& [ts, v] : s.samples)
            rows.emplace_back(ts, &id, s.kind, v);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b))
            return std::get<0>(a) < std::get<0>(b);
        return *std::get<1>(a) < *std::get<1>(b);
    });
    for (const auto& [ts, id, m, v] : rows)
        out << ts << ',' << *id << ',' << metric_name(m) << ',' << format_milli(v) << '\n';
}

inline void write_csv_file(const std::string& path, const building_dataset& d) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot open " + path + " for writing");
    write_csv(out, d);
}

// --- synthetic data ------------------------------------------------------------

/// Per-metric recipe: base level plus a daily sinusoid plus gaussian noise,
/// clipped to the metric's physical range and rounded to 3 decimals.
struct metric_synth {
    double base = 0.0;
    double amplitude = 0.0;
    double sigma = 0.0;
    int64_t tick_s = 300;
    std::vector<std::string> sensor_ids;

    friend bool operator==(const metric_synth&, const metric_synth&) = default;
};

struct synthetic_spec {
    std::string building_id = "synthetic";
    int64_t start_time_s = 0;
    int64_t duration_s = 0;
    std::map<metric, metric_synth> metrics;

    bool valid() const {
        if (duration_s <= 0)
            return false;
        for (const auto& [m, ms] : metrics)
            if (ms.sigma < 0 || ms.tick_s <= 0 || ms.sensor_ids.empty())
                return false;
        return !metrics.empty();
    }

    friend bool operator==(const synthetic_spec&, const synthetic_spec&) = default;
};

inline building_dataset generate_synthetic(const synthetic_spec& spec, uint64_t seed) {
    if (!spec.valid())
        throw data_error("synthetic spec invalid");
    building_dataset d;
    d.building_id = spec.building_id;
    for (const auto& [m, ms] : spec.metrics) {
        for (size_t si = 0; si < ms.sensor_ids.size(); ++si) {
            rng gen(derive_seed(seed, static_cast<uint64_t>(metric_index(m)) + 101, si + 1));
            sensor_series s;
            s.sensor_id = ms.sensor_ids[si];
            s.kind = m;
            for (int64_t t = spec.start_time_s; t <= spec.start_time_s + spec.duration_s; t += ms.tick_s) {
                double day_phase = 2.0 * 3.14159265358979323846 * static_cast<double>(t % 86400) / 86400.0;
                double v = ms.base + ms.amplitude * std::sin(day_phase);
                if (ms.sigma > 0)
                    v += ms.sigma * gen.normal();
                int64_t milli = clip_to_range(m, static_cast<int64_t>(std::llround(v * 1000.0)));
                s.samples.emplace_back(t, milli);
            }
            if (d.series.count(s.sensor_id))
                throw data_error("synthetic spec reuses sensor id " + s.sensor_id);
            d.series.emplace(s.sensor_id, std::move(s));
        }
    }
    validate_dataset(d);
    return d;
}

}  // namespace perfcon
