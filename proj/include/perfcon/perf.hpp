#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string_view>

#include "perfcon/metric.hpp"
#include "perfcon/util.hpp"

namespace perfcon {

/// Reward band for a metric or a role in one evaluation window:
/// full reward, reduced reward, or failure (no reward).
enum class tier : uint8_t { full, reduced, fail };

constexpr std::string_view tier_name(tier t) {
    switch (t) {
    case tier::full: return "full";
    case tier::reduced: return "reduced";
    case tier::fail: return "fail";
    }
    return "?";
}

inline std::optional<tier> parse_tier(std::string_view s) {
    for (tier t : {tier::full, tier::reduced, tier::fail})
        if (s == tier_name(t))
            return t;
    return std::nullopt;
}

/// Agreed performance baselines: expected energy consumption per energy
/// interval, set point temperature, target relative humidity, target CO2
/// level. Stored as exact milli-units; all must be strictly positive since
/// every ratio divides by them.
struct baselines {
    int64_t e0_milli = 0;     // kWh per energy interval
    int64_t t0_milli = 0;     // degC
    int64_t rh0_milli = 0;    // %
    int64_t co2_0_milli = 0;  // ppm

    bool valid() const { return e0_milli > 0 && t0_milli > 0 && rh0_milli > 0 && co2_0_milli > 0; }

    int64_t of(metric m) const {
        switch (m) {
        case metric::temperature: return t0_milli;
        case metric::humidity: return rh0_milli;
        case metric::co2: return co2_0_milli;
        case metric::energy: return e0_milli;
        }
        return 0;
    }

    friend bool operator==(const baselines&, const baselines&) = default;
};

/// Energy performance ratio: actual average consumption over expected.
inline double energy_performance(double e_avg, double e0) { return e_avg / e0; }

/// Comfort ratio shared by temperature, humidity and CO2: actual window
/// average over the agreed baseline.
inline double comfort_ratio(double actual_avg, double baseline) { return actual_avg / baseline; }

/// Arithmetic mean of the samples in a window; empty windows have no average.
inline std::optional<double> interval_average(std::span<const double> samples) {
    if (samples.empty())
        return std::nullopt;
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    return sum / static_cast<double>(samples.size());
}

/// Ratio of a window's mean (kept as an exact milli-unit sum) to a baseline.
/// Single floating-point division keeps streaming and batch evaluation
/// bit-identical.
inline std::optional<double> window_ratio(int64_t sum_milli, int64_t count, int64_t baseline_milli) {
    if (count == 0)
        return std::nullopt;
    return static_cast<double>(sum_milli) / (static_cast<double>(count) * static_cast<double>(baseline_milli));
}

/// Saturation water vapor pressure scaled by relative humidity (Magnus
/// approximation), in hPa.
inline double vapor_pressure(double t_c, double rh_pct) {
    return rh_pct / 100.0 * 6.1094 * std::exp(17.625 * t_c / (t_c + 243.04));
}

/// Coefficients of the simplified linear predicted-mean-vote model.
/// Defaults are deliberately zero: the fitted comfort-study values are not
/// shipped and must come from configuration.
struct pmv_coefficients {
    double a = 0.0;  // per degC
    double b = 0.0;  // per hPa
    double c = 0.0;  // offset

    friend bool operator==(const pmv_coefficients&, const pmv_coefficients&) = default;
};

/// Simplified PMV from air temperature and water vapor pressure.
inline double pmv(double t_c, double p_v_hpa, pmv_coefficients k) { return k.a * t_c + k.b * p_v_hpa - k.c; }

/// One comfort metric's reward bands over the ratio axis.
/// Full = [full_lo, full_hi]; Reduced = [reduced_lo, full_lo) u (full_hi, reduced_hi];
/// everything else fails. Requires reduced_lo <= full_lo <= full_hi <= reduced_hi.
struct band_limits {
    double reduced_lo = 0.0;
    double full_lo = 0.0;
    double full_hi = 0.0;
    double reduced_hi = 0.0;

    bool valid() const { return reduced_lo <= full_lo && full_lo <= full_hi && full_hi <= reduced_hi; }

    friend bool operator==(const band_limits&, const band_limits&) = default;
};

struct comfort_bands {
    band_limits temperature{0.8, 0.9, 1.1, 1.2};
    band_limits humidity{0.4, 0.75, 1.5, 1.8};
    band_limits co2{0.0, 0.0, 1.0, 1.1};

    const band_limits& of(metric m) const {
        switch (m) {
        case metric::temperature: return temperature;
        case metric::humidity: return humidity;
        default: return co2;
        }
    }
    band_limits& of(metric m) { return const_cast<band_limits&>(std::as_const(*this).of(m)); }

    bool valid() const { return temperature.valid() && humidity.valid() && co2.valid(); }

    friend bool operator==(const comfort_bands&, const comfort_bands&) = default;
};

/// Band lookup for one comfort metric. A window with no samples has no ratio
/// and fails outright.
inline tier classify_metric(std::optional<double> ratio, const band_limits& b) {
    if (!ratio.has_value())
        return tier::fail;
    double r = *ratio;
    if (r >= b.full_lo && r <= b.full_hi)
        return tier::full;
    if (r >= b.reduced_lo && r <= b.reduced_hi)
        return tier::reduced;
    return tier::fail;
}

/// Facility-manager outcome across the three comfort metrics: two greens pay
/// in full, otherwise two reds pay nothing, otherwise the reward is reduced.
/// Only the tier counts matter, never which metric produced them.
inline tier fm_outcome(tier t_temp, tier t_rh, tier t_co2) {
    int greens = 0;
    int reds = 0;
    for (tier t : {t_temp, t_rh, t_co2}) {
        greens += t == tier::full;
        reds += t == tier::fail;
    }
    if (greens >= 2)
        return tier::full;
    if (reds >= 2)
        return tier::fail;
    return tier::reduced;
}

/// Maps a tier to the payable fraction of the per-interval fee.
inline rational tier_fraction(tier t, rational reduced_fraction) {
    switch (t) {
    case tier::full: return rational{1, 1};
    case tier::reduced: return reduced_fraction;
    case tier::fail: return rational{0, 1};
    }
    return rational{0, 1};
}

/// Contractor outcome from the energy-performance ratio in relation to the
/// room-temperature comfort ratio. The cell table is configuration: energy
/// bands are ep <= ep_full_max, (ep_full_max, ep_fail_min], > ep_fail_min;
/// temperature bands are tc < tc_low, [tc_low, tc_high], > tc_high.
///
/// The default table keeps two properties: meeting the energy target never
/// pays in full when room comfort was sacrificed (tc below tc_low), and
/// badly missing the energy target is excused down to a reduced reward when
/// the building ran hot (tc above tc_high).
struct contractor_policy {
    double ep_full_max = 1.0;
    double ep_fail_min = 1.5;
    double tc_low = 0.8;
    double tc_high = 1.2;
    // [energy band][temperature band]
    std::array<std::array<tier, 3>, 3> table = {{
        {tier::reduced, tier::full, tier::full},
        {tier::reduced, tier::reduced, tier::reduced},
        {tier::fail, tier::fail, tier::reduced},
    }};

    bool valid() const { return ep_full_max <= ep_fail_min && tc_low <= tc_high; }

    tier classify(double ep, double tc_t) const {
        size_t ei = ep <= ep_full_max ? 0 : (ep <= ep_fail_min ? 1 : 2);
        size_t ti = tc_t < tc_low ? 0 : (tc_t <= tc_high ? 1 : 2);
        return table[ei][ti];
    }

    friend bool operator==(const contractor_policy&, const contractor_policy&) = default;
};

}  // namespace perfcon
