#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "perfcon/util.hpp"

namespace perfcon {

enum class metric : uint8_t { temperature, humidity, co2, energy };

constexpr std::array<metric, 4> all_metrics = {metric::temperature, metric::humidity, metric::co2, metric::energy};
constexpr std::array<metric, 3> comfort_metrics = {metric::temperature, metric::humidity, metric::co2};

constexpr size_t metric_index(metric m) { return static_cast<size_t>(m); }

constexpr std::string_view metric_name(metric m) {
    switch (m) {
    case metric::temperature: return "temperature";
    case metric::humidity: return "humidity";
    case metric::co2: return "co2";
    case metric::energy: return "energy";
    }
    return "?";
}

inline std::optional<metric> parse_metric(std::string_view s) {
    for (metric m : all_metrics)
        if (s == metric_name(m))
            return m;
    return std::nullopt;
}

constexpr bool is_thermal(metric m) { return m != metric::energy; }

// Physical bounds in milli-units: temperature [-50,100] degC, humidity [0,100] %,
// co2 and energy non-negative.
inline bool value_in_range(metric m, int64_t milli) {
    switch (m) {
    case metric::temperature: return milli >= -50'000 && milli <= 100'000;
    case metric::humidity: return milli >= 0 && milli <= 100'000;
    case metric::co2: return milli >= 0;
    case metric::energy: return milli >= 0;
    }
    return false;
}

// Clip helper for the synthetic generator.
inline int64_t clip_to_range(metric m, int64_t milli) {
    switch (m) {
    case metric::temperature:
        return milli < -50'000 ? -50'000 : (milli > 100'000 ? 100'000 : milli);
    case metric::humidity:
        return milli < 0 ? 0 : (milli > 100'000 ? 100'000 : milli);
    case metric::co2:
    case metric::energy:
        return milli < 0 ? 0 : milli;
    }
    return milli;
}

}  // namespace perfcon
