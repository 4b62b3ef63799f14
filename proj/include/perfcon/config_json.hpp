#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "perfcon/contract.hpp"
#include "perfcon/costs.hpp"
#include "perfcon/oracle.hpp"
#include "perfcon/scenario.hpp"

namespace perfcon {

using json = nlohmann::ordered_json;

// Money is serialized as decimal strings; integer JSON numbers are accepted
// for convenience. Floats are rejected to keep amounts exact.
inline json amount_to_json(amount v) { return amount_to_string(v); }

inline amount amount_from_json(const json& j, const char* what) {
    if (j.is_string())
        return parse_int128(j.get_ref<const std::string&>());
    if (j.is_number_integer())
        return static_cast<amount>(j.get<int64_t>());
    if (j.is_number_unsigned())
        return static_cast<amount>(j.get<uint64_t>());
    throw error(std::string(what) + ": amount must be a decimal string or integer");
}

// 3-decimal fixed point: numbers or strings on input, plain numbers on output.
inline int64_t milli_from_json(const json& j, const char* what) {
    if (j.is_string())
        return parse_milli(j.get_ref<const std::string&>());
    if (j.is_number()) {
        double v = j.get<double>() * 1000.0;
        if (!std::isfinite(v) || std::fabs(v) > 9e15)
            throw error(std::string(what) + ": value out of range");
        return std::llround(v);
    }
    throw error(std::string(what) + ": expected a decimal value");
}

inline json milli_to_json(int64_t milli) {
    if (milli % 1000 == 0)
        return milli / 1000;
    return static_cast<double>(milli) / 1000.0;
}

template <typename T>
inline T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return fallback;
    return it->get<T>();
}

inline const json& need(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end())
        throw error(std::string(ctx) + ": missing key '" + key + "'");
    return *it;
}

// --- perf configuration --------------------------------------------------------

inline json bands_to_json(const comfort_bands& b) {
    auto one = [](const band_limits& l) {
        return json{{"reduced_lo", l.reduced_lo}, {"full_lo", l.full_lo}, {"full_hi", l.full_hi},
                    {"reduced_hi", l.reduced_hi}};
    };
    return json{{"temperature", one(b.temperature)}, {"humidity", one(b.humidity)}, {"co2", one(b.co2)}};
}

inline comfort_bands bands_from_json(const json& j) {
    comfort_bands b;
    for (metric m : comfort_metrics) {
        auto it = j.find(std::string(metric_name(m)));
        if (it == j.end())
            continue;
        band_limits& l = b.of(m);
        l.reduced_lo = get_or(*it, "reduced_lo", l.reduced_lo);
        l.full_lo = get_or(*it, "full_lo", l.full_lo);
        l.full_hi = get_or(*it, "full_hi", l.full_hi);
        l.reduced_hi = get_or(*it, "reduced_hi", l.reduced_hi);
    }
    return b;
}

inline json contractor_policy_to_json(const contractor_policy& p) {
    json table = json::array();
    for (const auto& row : p.table) {
        json r = json::array();
        for (tier t : row)
            r.push_back(std::string(tier_name(t)));
        table.push_back(r);
    }
    return json{{"ep_full_max", p.ep_full_max}, {"ep_fail_min", p.ep_fail_min}, {"tc_low", p.tc_low},
                {"tc_high", p.tc_high}, {"table", table}};
}

inline contractor_policy contractor_policy_from_json(const json& j) {
    contractor_policy p;
    p.ep_full_max = get_or(j, "ep_full_max", p.ep_full_max);
    p.ep_fail_min = get_or(j, "ep_fail_min", p.ep_fail_min);
    p.tc_low = get_or(j, "tc_low", p.tc_low);
    p.tc_high = get_or(j, "tc_high", p.tc_high);
    if (auto it = j.find("table"); it != j.end()) {
        if (!it->is_array() || it->size() != 3)
            throw error("contractor_policy.table: expected 3 rows");
        for (size_t i = 0; i < 3; ++i) {
            const json& row = (*it)[i];
            if (!row.is_array() || row.size() != 3)
                throw error("contractor_policy.table: expected 3 columns");
            for (size_t c = 0; c < 3; ++c) {
                auto t = parse_tier(row[c].get_ref<const std::string&>());
                if (!t)
                    throw error("contractor_policy.table: unknown tier " + row[c].dump());
                p.table[i][c] = *t;
            }
        }
    }
    return p;
}

inline json rational_to_json(rational r) { return json{{"num", r.num}, {"den", r.den}}; }

inline rational rational_from_json(const json& j) {
    return rational{need(j, "num", "fraction").get<int64_t>(), need(j, "den", "fraction").get<int64_t>()};
}

inline json sampling_to_json(const sampling_policy& p) {
    return json{{"temperature_s", p.of(metric::temperature)},
                {"humidity_s", p.of(metric::humidity)},
                {"co2_s", p.of(metric::co2)},
                {"energy_s", p.of(metric::energy)}};
}

inline sampling_policy sampling_from_json(const json& j) {
    sampling_policy p;
    p.of(metric::temperature) = get_or(j, "temperature_s", p.of(metric::temperature));
    p.of(metric::humidity) = get_or(j, "humidity_s", p.of(metric::humidity));
    p.of(metric::co2) = get_or(j, "co2_s", p.of(metric::co2));
    p.of(metric::energy) = get_or(j, "energy_s", p.of(metric::energy));
    return p;
}

// --- case configuration file -----------------------------------------------------

inline json case_to_json(const case_params& c) {
    json j;
    j["building_id"] = c.building_id;
    j["sensors"] = json{{"setpoint", c.setpoint_ids}, {"temperature", c.temperature_ids},
                        {"humidity", c.humidity_ids}, {"co2", c.co2_ids}, {"energy", c.energy_ids}};
    j["baselines"] = json{{"E0_kwh", milli_to_json(c.base.e0_milli)},
                          {"T0_c", milli_to_json(c.base.t0_milli)},
                          {"RH0_pct", milli_to_json(c.base.rh0_milli)},
                          {"CO2_0_ppm", milli_to_json(c.base.co2_0_milli)}};
    j["fees"] = json{{"fm_per_interval", amount_to_json(c.fm_fee_per_interval)},
                     {"contractor_per_interval", amount_to_json(c.contractor_fee_per_interval)}};
    j["reduced_fraction"] = rational_to_json(c.reduced_fraction);
    j["intervals"] = json{{"thermal_s", c.thermal_interval_s}, {"energy_s", c.energy_interval_s},
                          {"redemption_s", c.redemption_interval_s}};
    j["duration_s"] = c.duration_s;
    j["start_time_s"] = c.start_time_s;
    j["bands"] = bands_to_json(c.bands);
    j["contractor_policy"] = contractor_policy_to_json(c.policy);
    j["pmv"] = json{{"a", c.pmv.a}, {"b", c.pmv.b}, {"c", c.pmv.c}};
    return j;
}

inline case_params case_from_json(const json& j) {
    case_params c;
    c.building_id = get_or<std::string>(j, "building_id", "");
    const json& sensors = need(j, "sensors", "case");
    c.setpoint_ids = get_or(sensors, "setpoint", std::vector<std::string>{});
    c.temperature_ids = get_or(sensors, "temperature", std::vector<std::string>{});
    c.humidity_ids = get_or(sensors, "humidity", std::vector<std::string>{});
    c.co2_ids = get_or(sensors, "co2", std::vector<std::string>{});
    c.energy_ids = get_or(sensors, "energy", std::vector<std::string>{});
    const json& base = need(j, "baselines", "case");
    c.base.e0_milli = milli_from_json(need(base, "E0_kwh", "baselines"), "E0_kwh");
    c.base.t0_milli = milli_from_json(need(base, "T0_c", "baselines"), "T0_c");
    c.base.rh0_milli = milli_from_json(need(base, "RH0_pct", "baselines"), "RH0_pct");
    c.base.co2_0_milli = milli_from_json(need(base, "CO2_0_ppm", "baselines"), "CO2_0_ppm");
    const json& fees = need(j, "fees", "case");
    c.fm_fee_per_interval = amount_from_json(need(fees, "fm_per_interval", "fees"), "fm_per_interval");
    c.contractor_fee_per_interval =
        amount_from_json(need(fees, "contractor_per_interval", "fees"), "contractor_per_interval");
    if (auto it = j.find("reduced_fraction"); it != j.end())
        c.reduced_fraction = rational_from_json(*it);
    if (auto it = j.find("intervals"); it != j.end()) {
        c.thermal_interval_s = get_or(*it, "thermal_s", c.thermal_interval_s);
        c.energy_interval_s = get_or(*it, "energy_s", c.energy_interval_s);
        c.redemption_interval_s = get_or(*it, "redemption_s", c.redemption_interval_s);
    }
    c.duration_s = need(j, "duration_s", "case").get<int64_t>();
    c.start_time_s = get_or<int64_t>(j, "start_time_s", 0);
    if (auto it = j.find("bands"); it != j.end())
        c.bands = bands_from_json(*it);
    if (auto it = j.find("contractor_policy"); it != j.end())
        c.policy = contractor_policy_from_json(*it);
    if (auto it = j.find("pmv"); it != j.end()) {
        c.pmv.a = get_or(*it, "a", 0.0);
        c.pmv.b = get_or(*it, "b", 0.0);
        c.pmv.c = get_or(*it, "c", 0.0);
    }
    return c;
}

// --- gas schedule ------------------------------------------------------------------

inline json gas_schedule_to_json(const gas_schedule& s) {
    json j;
    for (tx_kind k : all_tx_kinds)
        j[std::string(tx_kind_name(k))] = s.of(k);
    return j;
}

inline gas_schedule gas_schedule_from_json(const json& j) {
    gas_schedule s;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto k = parse_tx_kind(it.key());
        if (!k)
            throw error("gas_schedule: unknown transaction kind '" + it.key() + "'");
        s.of(*k) = it->get<int64_t>();
    }
    if (!s.valid())
        throw error("gas_schedule: all gas amounts must be positive");
    return s;
}

// --- synthetic spec -----------------------------------------------------------------

inline json synthetic_to_json(const synthetic_spec& s) {
    json metrics;
    for (const auto& [m, ms] : s.metrics)
        metrics[std::string(metric_name(m))] = json{{"base", ms.base},
                                                    {"amplitude", ms.amplitude},
                                                    {"sigma", ms.sigma},
                                                    {"tick_s", ms.tick_s},
                                                    {"sensors", ms.sensor_ids}};
    return json{{"building_id", s.building_id}, {"start_time_s", s.start_time_s}, {"duration_s", s.duration_s},
                {"metrics", metrics}};
}

inline synthetic_spec synthetic_from_json(const json& j) {
    synthetic_spec s;
    s.building_id = get_or<std::string>(j, "building_id", "synthetic");
    s.start_time_s = get_or<int64_t>(j, "start_time_s", 0);
    s.duration_s = need(j, "duration_s", "synthetic").get<int64_t>();
    const json& metrics = need(j, "metrics", "synthetic");
    for (auto it = metrics.begin(); it != metrics.end(); ++it) {
        auto m = parse_metric(it.key());
        if (!m)
            throw error("synthetic: unknown metric '" + it.key() + "'");
        metric_synth ms;
        ms.base = get_or(*it, "base", 0.0);
        ms.amplitude = get_or(*it, "amplitude", 0.0);
        ms.sigma = get_or(*it, "sigma", 0.0);
        ms.tick_s = get_or<int64_t>(*it, "tick_s", 300);
        ms.sensor_ids = get_or(*it, "sensors", std::vector<std::string>{});
        s.metrics[*m] = std::move(ms);
    }
    return s;
}

// --- scenario configuration -----------------------------------------------------------

inline json scenario_to_json(const scenario_config& c) {
    json j;
    j["seed"] = c.seed;
    j["gas_price_gigaunits"] = static_cast<int64_t>(c.gas_price / gigaunit);
    j["gas_schedule"] = gas_schedule_to_json(c.schedule);
    json actors;
    for (const auto& [name, bal] : c.actors)
        actors[name] = amount_to_json(bal);
    j["actors"] = actors;
    j["case"] = case_to_json(c.case_cfg);
    j["sampling"] = sampling_to_json(c.sampling);
    if (c.dataset.csv_path)
        j["dataset"] = json{{"csv", *c.dataset.csv_path}};
    else if (c.dataset.synthetic)
        j["dataset"] = json{{"synthetic", synthetic_to_json(*c.dataset.synthetic)}};
    if (c.fund_amount)
        j["fund_amount"] = amount_to_json(*c.fund_amount);
    if (c.skip_funding)
        j["skip_funding"] = true;
    if (c.deactivate_at_s)
        j["deactivate_at_s"] = *c.deactivate_at_s;
    if (c.report_gas_price_gigaunits > 0)
        j["report"] = json{{"gas_price_gigaunits", c.report_gas_price_gigaunits}, {"fiat_rate", c.report_fiat_rate}};
    return j;
}

inline scenario_config scenario_from_json(const json& j) {
    scenario_config c;
    c.seed = need(j, "seed", "scenario").get<uint64_t>();
    c.gas_price = static_cast<amount>(get_or<int64_t>(j, "gas_price_gigaunits", 20)) * gigaunit;
    if (auto it = j.find("gas_schedule"); it != j.end())
        c.schedule = gas_schedule_from_json(*it);
    const json& actors = need(j, "actors", "scenario");
    for (auto it = actors.begin(); it != actors.end(); ++it)
        c.actors[it.key()] = amount_from_json(*it, it.key().c_str());
    c.case_cfg = case_from_json(need(j, "case", "scenario"));
    if (auto it = j.find("sampling"); it != j.end())
        c.sampling = sampling_from_json(*it);
    const json& ds = need(j, "dataset", "scenario");
    if (auto it = ds.find("csv"); it != ds.end())
        c.dataset.csv_path = it->get<std::string>();
    if (auto it = ds.find("synthetic"); it != ds.end())
        c.dataset.synthetic = synthetic_from_json(*it);
    if (auto it = j.find("fund_amount"); it != j.end())
        c.fund_amount = amount_from_json(*it, "fund_amount");
    c.skip_funding = get_or(j, "skip_funding", false);
    if (auto it = j.find("deactivate_at_s"); it != j.end())
        c.deactivate_at_s = it->get<int64_t>();
    if (auto it = j.find("report"); it != j.end()) {
        c.report_gas_price_gigaunits = get_or(*it, "gas_price_gigaunits", 0.0);
        c.report_fiat_rate = get_or(*it, "fiat_rate", 0.0);
    }
    return c;
}

// --- defaults document (config print-defaults) -------------------------------------------

inline json defaults_to_json() {
    case_params c;
    json j;
    j["gas_price_gigaunits"] = 20;
    j["gas_schedule"] = gas_schedule_to_json(gas_schedule{});
    j["reduced_fraction"] = rational_to_json(c.reduced_fraction);
    j["intervals"] = json{{"thermal_s", c.thermal_interval_s}, {"energy_s", c.energy_interval_s},
                          {"redemption_s", c.redemption_interval_s}};
    j["bands"] = bands_to_json(comfort_bands{});
    j["contractor_policy"] = contractor_policy_to_json(contractor_policy{});
    j["pmv"] = json{{"a", 0.0}, {"b", 0.0}, {"c", 0.0}};
    j["sampling"] = sampling_to_json(sampling_policy{});
    j["sampling_presets"] = json{{"five_per_day", sampling_to_json(sampling_policy::five_per_day())},
                                 {"every_15_minutes", sampling_to_json(sampling_policy::every_15_minutes())}};
    return j;
}

// --- reports and exports --------------------------------------------------------------------

inline json report_to_json(const cost_report& r) {
    json by_kind;
    for (tx_kind k : all_tx_kinds)
        by_kind[std::string(tx_kind_name(k))] = json{{"gas", r.gas_of(k)}, {"share", r.share_of(k)}};
    return json{{"total_gas", r.total_gas},
                {"gas_price_gigaunits", r.gas_price_gigaunits},
                {"fiat_rate", r.fiat_rate},
                {"coin_cost", r.coin_cost},
                {"fiat_cost", r.fiat_cost},
                {"by_kind", by_kind}};
}

inline json submission_report_to_json(const submission_report& r) {
    auto arr = [](const std::array<int64_t, 4>& a) {
        json j;
        for (metric m : all_metrics)
            j[std::string(metric_name(m))] = a[metric_index(m)];
        return j;
    };
    return json{{"planned", r.planned},
                {"submitted", r.submitted},
                {"rejected", r.rejected},
                {"skipped", r.skipped},
                {"planned_by_metric", arr(r.planned_by_metric)},
                {"submitted_by_metric", arr(r.submitted_by_metric)},
                {"rejected_by_metric", arr(r.rejected_by_metric)},
                {"skipped_by_metric", arr(r.skipped_by_metric)}};
}

inline json status_to_json(const status_snapshot& s) {
    json j{{"case_id", s.case_id},
           {"state", std::string(lifecycle_name(s.state))},
           {"funded", amount_to_json(s.funded)},
           {"escrow", amount_to_json(s.escrow)},
           {"accruals", json{{"facility_manager", amount_to_json(s.accrual_fm)},
                             {"contractor", amount_to_json(s.accrual_contractor)}}},
           {"redeemed", json{{"facility_manager", amount_to_json(s.redeemed_fm)},
                             {"contractor", amount_to_json(s.redeemed_contractor)}}},
           {"refunded", amount_to_json(s.refunded)},
           {"measurement_count", s.measurement_count},
           {"evaluated_windows", json{{"thermal", s.evaluated_thermal}, {"energy", s.evaluated_energy}}}};
    if (s.last_window_tiers) {
        const auto& t = *s.last_window_tiers;
        j["last_window_tiers"] = json{{"temperature", std::string(tier_name(t[0]))},
                                      {"humidity", std::string(tier_name(t[1]))},
                                      {"co2", std::string(tier_name(t[2]))},
                                      {"contractor", std::string(tier_name(t[3]))}};
    }
    return j;
}

inline json summary_to_json(const scenario_summary& s) {
    json j;
    j["completed"] = s.completed;
    j["deactivated"] = s.deactivated;
    if (!s.failed_step.empty()) {
        j["failed_step"] = s.failed_step;
        j["failure_reason"] = s.failure_reason;
    }
    j["final_state"] = std::string(lifecycle_name(s.final_state));
    char dig[32];
    std::snprintf(dig, sizeof(dig), "%016llx", static_cast<unsigned long long>(s.state_digest));
    j["state_digest"] = dig;
    j["measurement_count"] = s.measurement_count;
    j["oracle_report"] = submission_report_to_json(s.oracle_report);
    j["payouts"] = json{{"facility_manager", amount_to_json(s.payout_fm)},
                        {"contractor", amount_to_json(s.payout_contractor)}};
    j["refund"] = amount_to_json(s.refund);
    j["payout_events"] = s.payout_events;
    j["total_gas"] = s.total_gas;
    j["submit_gas_share"] = s.submit_gas_share;
    j["cost_report"] = report_to_json(s.costs);
    j["actors"] = s.actor_addresses;
    return j;
}

/// Interval result export: one CSV record per evaluated window, ratios at 6
/// decimal places.
inline void write_results_csv(std::ostream& os, const std::vector<interval_result>& results) {
    os << "kind,index,t_begin,t_end,ep,tc_t,tc_rh,tc_co2,tier_t,tier_rh,tier_co2,contractor_tier,"
          "fm_fraction,contractor_fraction,fm_reward,contractor_reward,"
          "samples_t,samples_rh,samples_co2,samples_energy\n";
    auto ratio = [](const std::optional<double>& v) {
        if (!v)
            return std::string();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", *v);
        return std::string(buf);
    };
    auto frac = [](rational r) { return std::to_string(r.num) + "/" + std::to_string(r.den); };
    for (const interval_result& r : results) {
        bool thermal = r.kind == window_kind::thermal;
        os << (thermal ? "thermal" : "energy") << ',' << r.index << ',' << r.t_begin << ',' << r.t_end << ','
           << ratio(r.ep) << ',' << ratio(r.tc_t) << ',' << ratio(r.tc_rh) << ',' << ratio(r.tc_co2) << ',';
        if (thermal)
            os << tier_name(r.tier_t) << ',' << tier_name(r.tier_rh) << ',' << tier_name(r.tier_co2) << ','
               << tier_name(r.contractor_tier) << ',' << frac(r.fm_fraction) << ',' << frac(r.contractor_fraction)
               << ',' << amount_to_string(r.fm_reward) << ',' << amount_to_string(r.contractor_reward);
        else
            os << ",,,,,,,";
        os << ',' << r.samples_t << ',' << r.samples_rh << ',' << r.samples_co2 << ',' << r.samples_energy << '\n';
    }
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw error(path + ": " + e.what());
    }
    return j;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace perfcon
