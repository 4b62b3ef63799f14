#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perfcon/ledger.hpp"
#include "perfcon/metric.hpp"
#include "perfcon/perf.hpp"

namespace perfcon {

enum class role : uint8_t { contract_owner, building_owner, contractor, facility_manager, backend_oracle };

constexpr std::string_view role_name(role r) {
    switch (r) {
    case role::contract_owner: return "contract_owner";
    case role::building_owner: return "building_owner";
    case role::contractor: return "contractor";
    case role::facility_manager: return "facility_manager";
    case role::backend_oracle: return "backend_oracle";
    }
    return "?";
}

inline std::optional<role> parse_role(std::string_view s) {
    for (role r : {role::contract_owner, role::building_owner, role::contractor, role::facility_manager,
                   role::backend_oracle})
        if (s == role_name(r))
            return r;
    return std::nullopt;
}

enum class lifecycle_state : uint8_t { deployed, case_created, funded, active, completed, deactivated };

constexpr std::string_view lifecycle_name(lifecycle_state s) {
    switch (s) {
    case lifecycle_state::deployed: return "deployed";
    case lifecycle_state::case_created: return "case_created";
    case lifecycle_state::funded: return "funded";
    case lifecycle_state::active: return "active";
    case lifecycle_state::completed: return "completed";
    case lifecycle_state::deactivated: return "deactivated";
    }
    return "?";
}

/// One on-contract sensor sample, exact to 3 decimals.
struct measurement {
    int64_t case_id = 0;
    metric kind = metric::temperature;
    std::string sensor_id;
    int64_t timestamp = 0;
    int64_t value_milli = 0;

    friend bool operator==(const measurement&, const measurement&) = default;
};

/// Everything agreed at case creation. Sensor registries are per metric;
/// setpoint sensors are registered for reference but carry no submittable
/// metric. Fees are per evaluation interval; money is base units.
struct case_params {
    std::string building_id;
    std::vector<std::string> setpoint_ids;
    std::vector<std::string> temperature_ids;
    std::vector<std::string> humidity_ids;
    std::vector<std::string> co2_ids;
    std::vector<std::string> energy_ids;
    baselines base;
    amount fm_fee_per_interval = 0;
    amount contractor_fee_per_interval = 0;
    rational reduced_fraction{1, 2};
    int64_t thermal_interval_s = 86'400;
    int64_t energy_interval_s = 604'800;
    int64_t redemption_interval_s = 15'552'000;  // six months
    int64_t duration_s = 0;
    int64_t start_time_s = 0;
    comfort_bands bands;
    contractor_policy policy;
    pmv_coefficients pmv;

    const std::vector<std::string>& ids_of(metric m) const {
        switch (m) {
        case metric::temperature: return temperature_ids;
        case metric::humidity: return humidity_ids;
        case metric::co2: return co2_ids;
        case metric::energy: return energy_ids;
        }
        return energy_ids;
    }

    static int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

    int64_t thermal_window_count() const { return ceil_div(duration_s, thermal_interval_s); }
    int64_t energy_window_count() const { return ceil_div(duration_s, energy_interval_s); }

    int64_t window_begin(bool thermal, int64_t k) const {
        return start_time_s + k * (thermal ? thermal_interval_s : energy_interval_s);
    }
    int64_t window_end(bool thermal, int64_t k) const {
        int64_t e = start_time_s + (k + 1) * (thermal ? thermal_interval_s : energy_interval_s);
        return std::min(e, start_time_s + duration_s);
    }

    /// Full cover for the maximum possible payout: every thermal window paid
    /// in full for both roles.
    amount worst_case_escrow() const {
        return static_cast<amount>(thermal_window_count()) * (fm_fee_per_interval + contractor_fee_per_interval);
    }

    std::optional<reject_reason> validate() const {
        if (!base.valid())
            return reject_reason::invalid_baseline;
        if (temperature_ids.empty() || humidity_ids.empty() || co2_ids.empty() || energy_ids.empty())
            return reject_reason::invalid_sensor_list;
        // every sensor id maps to exactly one metric
        std::map<std::string, int> seen;
        for (const auto* list : {&setpoint_ids, &temperature_ids, &humidity_ids, &co2_ids, &energy_ids})
            for (const std::string& id : *list)
                if (id.empty() || ++seen[id] > 1)
                    return reject_reason::invalid_sensor_list;
        if (duration_s <= 0)
            return reject_reason::invalid_duration;
        if (thermal_interval_s <= 0 || energy_interval_s <= 0 || redemption_interval_s < thermal_interval_s)
            return reject_reason::invalid_interval;
        if (fm_fee_per_interval < 0 || contractor_fee_per_interval < 0)
            return reject_reason::invalid_fee;
        if (!valid_reduced_fraction(reduced_fraction))
            return reject_reason::invalid_fraction;
        if (start_time_s < 0 || !bands.valid() || !policy.valid())
            return reject_reason::invalid_params;
        return std::nullopt;
    }
};

enum class window_kind : uint8_t { thermal, energy };

/// Where a thermal window's energy-performance input came from: no energy
/// window closed yet, the latest closed one was empty, or a defined ratio.
enum class ep_source : uint8_t { unavailable, empty_window, defined };

struct interval_result {
    int64_t case_id = 0;
    window_kind kind = window_kind::thermal;
    int64_t index = 0;
    int64_t t_begin = 0;
    int64_t t_end = 0;
    std::optional<double> ep;
    std::optional<double> tc_t;
    std::optional<double> tc_rh;
    std::optional<double> tc_co2;
    ep_source ep_src = ep_source::unavailable;
    tier tier_t = tier::fail;
    tier tier_rh = tier::fail;
    tier tier_co2 = tier::fail;
    tier contractor_tier = tier::fail;
    rational fm_fraction{0, 1};
    rational contractor_fraction{0, 1};
    amount fm_reward = 0;
    amount contractor_reward = 0;
    int64_t samples_t = 0;
    int64_t samples_rh = 0;
    int64_t samples_co2 = 0;
    int64_t samples_energy = 0;
};

/// Ratios are recorded to 6 decimal places in exports and comparisons.
inline double round6(double v) { return static_cast<double>(std::llround(v * 1e6)) / 1e6; }

inline bool same_ratio6(const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value())
        return false;
    if (!a)
        return true;
    return round6(*a) == round6(*b);
}

/// Field-by-field equality at the recorded precision; used by the
/// streaming-vs-batch checks.
inline bool results_equal(const interval_result& a, const interval_result& b) {
    return a.case_id == b.case_id && a.kind == b.kind && a.index == b.index && a.t_begin == b.t_begin &&
           a.t_end == b.t_end && same_ratio6(a.ep, b.ep) && same_ratio6(a.tc_t, b.tc_t) &&
           same_ratio6(a.tc_rh, b.tc_rh) && same_ratio6(a.tc_co2, b.tc_co2) && a.ep_src == b.ep_src &&
           a.tier_t == b.tier_t && a.tier_rh == b.tier_rh && a.tier_co2 == b.tier_co2 &&
           a.contractor_tier == b.contractor_tier && a.fm_fraction == b.fm_fraction &&
           a.contractor_fraction == b.contractor_fraction && a.fm_reward == b.fm_reward &&
           a.contractor_reward == b.contractor_reward && a.samples_t == b.samples_t &&
           a.samples_rh == b.samples_rh && a.samples_co2 == b.samples_co2 && a.samples_energy == b.samples_energy;
}

struct status_snapshot {
    int64_t case_id = 0;
    lifecycle_state state = lifecycle_state::deployed;
    amount funded = 0;
    amount escrow = 0;
    amount accrual_fm = 0;
    amount accrual_contractor = 0;
    amount redeemed_fm = 0;
    amount redeemed_contractor = 0;
    amount refunded = 0;
    int64_t measurement_count = 0;
    int64_t evaluated_thermal = 0;
    int64_t evaluated_energy = 0;
    std::optional<std::array<tier, 4>> last_window_tiers;  // T, RH, CO2, contractor

    friend bool operator==(const status_snapshot&, const status_snapshot&) = default;
};

/// The performance-based contract state machine. All mutating entry points
/// are invoked from inside ledger transaction bodies (see simulation) and
/// follow a strict validate-then-commit discipline so a rejection never
/// leaves partial state behind.
class performance_contract {
public:
    performance_contract(const address& owner, const address& contract_addr)
        : owner_(owner), contract_addr_(contract_addr) {}

    // --- reads ---------------------------------------------------------------

    const address& owner() const { return owner_; }
    const address& contract_address() const { return contract_addr_; }
    lifecycle_state state() const { return state_; }
    const std::optional<case_params>& active_case() const { return case_; }
    const std::vector<measurement>& measurements() const { return measurements_; }
    const std::vector<interval_result>& results() const { return results_; }
    amount escrow() const { return escrow_; }
    amount funded() const { return funded_; }
    amount refunded() const { return refunded_; }
    amount accrual(role r) const { return r == role::facility_manager ? accrual_fm_ : accrual_contractor_; }
    amount redeemed(role r) const { return r == role::facility_manager ? redeemed_fm_ : redeemed_contractor_; }

    std::optional<address> holder(role r) const {
        switch (r) {
        case role::contract_owner: return owner_;
        case role::building_owner: return building_owner_;
        case role::contractor: return contractor_;
        case role::facility_manager: return facility_manager_;
        case role::backend_oracle: return backend_;
        }
        return std::nullopt;
    }

    int64_t evaluated_count(window_kind k) const { return k == window_kind::thermal ? next_thermal_ : next_energy_; }

    status_snapshot status(int64_t case_id) const {
        if (!case_ || case_id != case_id_)
            throw error("status: unknown case " + std::to_string(case_id));
        status_snapshot s;
        s.case_id = case_id_;
        s.state = state_;
        s.funded = funded_;
        s.escrow = escrow_;
        s.accrual_fm = accrual_fm_;
        s.accrual_contractor = accrual_contractor_;
        s.redeemed_fm = redeemed_fm_;
        s.redeemed_contractor = redeemed_contractor_;
        s.refunded = refunded_;
        s.measurement_count = static_cast<int64_t>(measurements_.size());
        s.evaluated_thermal = next_thermal_;
        s.evaluated_energy = next_energy_;
        for (auto it = results_.rbegin(); it != results_.rend(); ++it) {
            if (it->kind == window_kind::thermal) {
                s.last_window_tiers = std::array<tier, 4>{it->tier_t, it->tier_rh, it->tier_co2, it->contractor_tier};
                break;
            }
        }
        return s;
    }

    // --- role management -------------------------------------------------------

    std::optional<reject_reason> add_role(const address& caller, const address& grantee, role r,
                                          const tx_context& ctx) {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!(caller == owner_))
            return reject_reason::unauthorized;
        if (r == role::contract_owner || r == role::backend_oracle)
            return reject_reason::invalid_role;
        if (grantee.is_zero() || !ctx.account_exists(grantee))
            return reject_reason::unknown_address;
        std::optional<address>& slot = slot_of(r);
        if (slot.has_value())
            return reject_reason::already_assigned;
        slot = grantee;
        return std::nullopt;
    }

    // --- case lifecycle ---------------------------------------------------------

    std::optional<reject_reason> create_case(const address& caller, const case_params& params, int64_t* id_out) {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!(caller == owner_))
            return reject_reason::unauthorized;
        if (state_ != lifecycle_state::deployed)
            return reject_reason::wrong_state;
        if (auto r = params.validate())
            return r;
        case_ = params;
        case_id_ = 1;
        sensor_metric_.clear();
        for (metric m : all_metrics)
            for (const std::string& id : params.ids_of(m))
                sensor_metric_.emplace(id, m);
        thermal_acc_.assign(static_cast<size_t>(params.thermal_window_count()), {});
        energy_acc_.assign(static_cast<size_t>(params.energy_window_count()), {});
        last_redeem_fm_ = params.start_time_s;
        last_redeem_contractor_ = params.start_time_s;
        state_ = lifecycle_state::case_created;
        if (id_out)
            *id_out = case_id_;
        return std::nullopt;
    }

    std::optional<reject_reason> fund_escrow(const address& caller, amount value, tx_context& ctx) {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!building_owner_ || !(caller == *building_owner_))
            return reject_reason::unauthorized;
        if (state_ != lifecycle_state::case_created)
            return reject_reason::wrong_state;
        if (value < case_->worst_case_escrow())
            return reject_reason::insufficient_escrow;
        if (ctx.balance(caller) < value)
            return reject_reason::insufficient_balance;
        ctx.transfer_value(caller, contract_addr_, value);
        funded_ = value;
        escrow_ = value;
        state_ = lifecycle_state::funded;
        return std::nullopt;
    }

    std::optional<reject_reason> register_backend(const address& caller, const address& backend,
                                                  const tx_context& ctx) {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!(caller == owner_))
            return reject_reason::unauthorized;
        if (backend_.has_value())
            return reject_reason::already_assigned;
        if (backend.is_zero() || !ctx.account_exists(backend))
            return reject_reason::unknown_address;
        if (state_ != lifecycle_state::funded)
            return reject_reason::wrong_state;
        backend_ = backend;
        state_ = lifecycle_state::active;
        return std::nullopt;
    }

    // --- measurements ------------------------------------------------------------

    std::optional<reject_reason> validate_measurement(const address& caller, const measurement& m) const {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (state_ != lifecycle_state::active)
            return reject_reason::wrong_state;
        if (!backend_ || !(caller == *backend_))
            return reject_reason::unauthorized;
        if (m.case_id != case_id_)
            return reject_reason::unknown_case;
        auto it = sensor_metric_.find(m.sensor_id);
        if (it == sensor_metric_.end() || it->second != m.kind)
            return reject_reason::unknown_sensor;
        if (!value_in_range(m.kind, m.value_milli))
            return reject_reason::out_of_range;
        if (m.timestamp < case_->start_time_s || m.timestamp > case_->start_time_s + case_->duration_s)
            return reject_reason::out_of_window;
        if (m.timestamp < last_ts_[metric_index(m.kind)])
            return reject_reason::timestamp_regression;
        // a sample for an already evaluated window would silently escape
        // evaluation; reject it so stored data and results stay consistent
        if (m.timestamp < case_->start_time_s + case_->duration_s) {
            bool thermal = is_thermal(m.kind);
            int64_t k = (m.timestamp - case_->start_time_s) /
                        (thermal ? case_->thermal_interval_s : case_->energy_interval_s);
            if (k < (thermal ? next_thermal_ : next_energy_))
                return reject_reason::window_closed;
        }
        return std::nullopt;
    }

    /// Caller must have validated first.
    void file_measurement(const measurement& m) {
        measurements_.push_back(m);
        last_ts_[metric_index(m.kind)] = m.timestamp;
        if (m.timestamp == case_->start_time_s + case_->duration_s)
            return;  // horizon edge: stored, but belongs to no window
        bool thermal = is_thermal(m.kind);
        int64_t k =
            (m.timestamp - case_->start_time_s) / (thermal ? case_->thermal_interval_s : case_->energy_interval_s);
        if (thermal) {
            auto& acc = thermal_acc_[static_cast<size_t>(k)][metric_index(m.kind)];
            acc.count += 1;
            acc.sum_milli += m.value_milli;
        } else {
            auto& acc = energy_acc_[static_cast<size_t>(k)];
            acc.count += 1;
            acc.sum_milli += m.value_milli;
        }
    }

    // --- evaluation ---------------------------------------------------------------

    /// Next window whose end has passed `limit`, ordered by (end, energy
    /// before thermal). Evaluation only happens while the contract is active.
    std::optional<std::pair<window_kind, int64_t>> next_due_window(int64_t limit) const {
        if (state_ != lifecycle_state::active)
            return std::nullopt;
        std::optional<std::pair<window_kind, int64_t>> best;
        int64_t best_end = 0;
        if (next_energy_ < case_->energy_window_count()) {
            int64_t e = case_->window_end(false, next_energy_);
            if (e <= limit) {
                best = {window_kind::energy, next_energy_};
                best_end = e;
            }
        }
        if (next_thermal_ < case_->thermal_window_count()) {
            int64_t e = case_->window_end(true, next_thermal_);
            if (e <= limit && (!best || e < best_end))
                best = {window_kind::thermal, next_thermal_};
        }
        return best;
    }

    void evaluate_window(window_kind kind, int64_t index) {
        if (state_ != lifecycle_state::active)
            throw error("evaluate_window: contract not active");
        if (kind == window_kind::energy) {
            if (index != next_energy_)
                throw error("evaluate_window: energy windows must be evaluated in order");
            evaluate_energy(index);
        } else {
            if (index != next_thermal_)
                throw error("evaluate_window: thermal windows must be evaluated in order");
            evaluate_thermal(index);
        }
    }

    // --- payouts -------------------------------------------------------------------

    std::optional<reject_reason> redeem_validate(const address& caller, int64_t now) const {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        bool is_fm = facility_manager_ && caller == *facility_manager_;
        bool is_contractor = contractor_ && caller == *contractor_;
        if (!is_fm && !is_contractor)
            return reject_reason::unauthorized;
        if (state_ != lifecycle_state::active && state_ != lifecycle_state::completed)
            return reject_reason::wrong_state;
        int64_t last = is_fm ? last_redeem_fm_ : last_redeem_contractor_;
        if (now < last + case_->redemption_interval_s)
            return reject_reason::redemption_locked;
        return std::nullopt;
    }

    amount redeem_commit(const address& caller, tx_context& ctx) {
        bool is_fm = facility_manager_ && caller == *facility_manager_;
        amount payout = is_fm ? accrual_fm_ : accrual_contractor_;
        if (payout > 0)
            ctx.transfer_value(contract_addr_, caller, payout);
        if (is_fm) {
            redeemed_fm_ += payout;
            accrual_fm_ = 0;
            last_redeem_fm_ = ctx.clock();
        } else {
            redeemed_contractor_ += payout;
            accrual_contractor_ = 0;
            last_redeem_contractor_ = ctx.clock();
        }
        return payout;
    }

    std::optional<reject_reason> release_validate(const address& caller, int64_t now) const {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!building_owner_ || !(caller == *building_owner_))
            return reject_reason::unauthorized;
        if (state_ != lifecycle_state::active)
            return reject_reason::wrong_state;
        if (now < case_->start_time_s + case_->duration_s)
            return reject_reason::wrong_state;
        return std::nullopt;
    }

    /// Settles outstanding accruals, refunds the rest of the escrow and
    /// completes the contract. All windows must already be evaluated (the
    /// simulation sweeps before committing).
    amount release_commit(tx_context& ctx) {
        if (next_thermal_ != case_->thermal_window_count() || next_energy_ != case_->energy_window_count())
            throw error("release: windows left unevaluated");
        settle_accruals(ctx);
        amount refund = escrow_;
        if (refund > 0)
            ctx.transfer_value(contract_addr_, *building_owner_, refund);
        refunded_ += refund;
        escrow_ = 0;
        state_ = lifecycle_state::completed;
        return refund;
    }

    std::optional<reject_reason> deactivate_validate(const address& caller) const {
        if (state_ == lifecycle_state::deactivated)
            return reject_reason::wrong_state;
        if (!(caller == owner_))
            return reject_reason::unauthorized;
        return std::nullopt;
    }

    /// Pays out pending accruals and auto-refunds the remaining escrow so no
    /// funds are stranded, then halts the contract for good.
    void deactivate_commit(tx_context& ctx) {
        settle_accruals(ctx);
        if (escrow_ > 0) {
            ctx.transfer_value(contract_addr_, *building_owner_, escrow_);
            refunded_ += escrow_;
            escrow_ = 0;
        }
        state_ = lifecycle_state::deactivated;
    }

    /// funded == escrow + accruals + redeemed + refunded, exactly, always.
    bool escrow_conserved() const {
        return funded_ == escrow_ + accrual_fm_ + accrual_contractor_ + redeemed_fm_ + redeemed_contractor_ +
                              refunded_;
    }

    uint64_t digest() const {
        fnv1a64 h;
        h.bytes(owner_.bytes.data(), 32);
        h.bytes(contract_addr_.bytes.data(), 32);
        h.u8(static_cast<uint8_t>(state_));
        for (const auto& slot : {building_owner_, contractor_, facility_manager_, backend_}) {
            h.u8(slot.has_value());
            if (slot)
                h.bytes(slot->bytes.data(), 32);
        }
        h.u8(case_.has_value());
        if (case_) {
            const case_params& c = *case_;
            h.str(c.building_id);
            for (const auto* list : {&c.setpoint_ids, &c.temperature_ids, &c.humidity_ids, &c.co2_ids, &c.energy_ids}) {
                h.u64(list->size());
                for (const auto& id : *list)
                    h.str(id);
            }
            h.i64(c.base.e0_milli);
            h.i64(c.base.t0_milli);
            h.i64(c.base.rh0_milli);
            h.i64(c.base.co2_0_milli);
            h.i128(c.fm_fee_per_interval);
            h.i128(c.contractor_fee_per_interval);
            h.i64(c.reduced_fraction.num);
            h.i64(c.reduced_fraction.den);
            h.i64(c.thermal_interval_s);
            h.i64(c.energy_interval_s);
            h.i64(c.redemption_interval_s);
            h.i64(c.duration_s);
            h.i64(c.start_time_s);
            for (metric m : comfort_metrics) {
                const band_limits& b = c.bands.of(m);
                h.f64(b.reduced_lo);
                h.f64(b.full_lo);
                h.f64(b.full_hi);
                h.f64(b.reduced_hi);
            }
            h.f64(c.policy.ep_full_max);
            h.f64(c.policy.ep_fail_min);
            h.f64(c.policy.tc_low);
            h.f64(c.policy.tc_high);
            for (const auto& row : c.policy.table)
                for (tier t : row)
                    h.u8(static_cast<uint8_t>(t));
            h.f64(c.pmv.a);
            h.f64(c.pmv.b);
            h.f64(c.pmv.c);
        }
        h.i128(funded_);
        h.i128(escrow_);
        h.i128(refunded_);
        h.i128(accrual_fm_);
        h.i128(accrual_contractor_);
        h.i128(redeemed_fm_);
        h.i128(redeemed_contractor_);
        h.i64(last_redeem_fm_);
        h.i64(last_redeem_contractor_);
        h.u64(measurements_.size());
        for (const measurement& m : measurements_) {
            h.i64(m.case_id);
            h.u8(static_cast<uint8_t>(m.kind));
            h.str(m.sensor_id);
            h.i64(m.timestamp);
            h.i64(m.value_milli);
        }
        h.u64(results_.size());
        for (const interval_result& r : results_) {
            h.u8(static_cast<uint8_t>(r.kind));
            h.i64(r.index);
            h.i64(r.t_begin);
            h.i64(r.t_end);
            for (const auto& ratio : {r.ep, r.tc_t, r.tc_rh, r.tc_co2}) {
                h.u8(ratio.has_value());
                if (ratio)
                    h.f64(*ratio);
            }
            h.u8(static_cast<uint8_t>(r.ep_src));
            h.u8(static_cast<uint8_t>(r.tier_t));
            h.u8(static_cast<uint8_t>(r.tier_rh));
            h.u8(static_cast<uint8_t>(r.tier_co2));
            h.u8(static_cast<uint8_t>(r.contractor_tier));
            h.i64(r.fm_fraction.num);
            h.i64(r.fm_fraction.den);
            h.i64(r.contractor_fraction.num);
            h.i64(r.contractor_fraction.den);
            h.i128(r.fm_reward);
            h.i128(r.contractor_reward);
            h.i64(r.samples_t);
            h.i64(r.samples_rh);
            h.i64(r.samples_co2);
            h.i64(r.samples_energy);
        }
        return h.state;
    }

private:
    friend struct contract_snapshot_access;

    struct win_acc {
        int64_t count = 0;
        int64_t sum_milli = 0;
    };

    std::optional<address>& slot_of(role r) {
        switch (r) {
        case role::building_owner: return building_owner_;
        case role::contractor: return contractor_;
        case role::facility_manager: return facility_manager_;
        default: return backend_;
        }
    }

    void evaluate_energy(int64_t k) {
        const win_acc& acc = energy_acc_[static_cast<size_t>(k)];
        interval_result r;
        r.case_id = case_id_;
        r.kind = window_kind::energy;
        r.index = k;
        r.t_begin = case_->window_begin(false, k);
        r.t_end = case_->window_end(false, k);
        r.ep = window_ratio(acc.sum_milli, acc.count, case_->base.e0_milli);
        r.ep_src = r.ep ? ep_source::defined : ep_source::empty_window;
        r.samples_energy = acc.count;
        results_.push_back(r);
        carried_ep_src_ = r.ep_src;
        carried_ep_ = r.ep.value_or(0.0);
        next_energy_ += 1;
    }

    void evaluate_thermal(int64_t k) {
        const auto& acc = thermal_acc_[static_cast<size_t>(k)];
        const case_params& c = *case_;
        interval_result r;
        r.case_id = case_id_;
        r.kind = window_kind::thermal;
        r.index = k;
        r.t_begin = c.window_begin(true, k);
        r.t_end = c.window_end(true, k);
        r.tc_t = window_ratio(acc[metric_index(metric::temperature)].sum_milli,
                              acc[metric_index(metric::temperature)].count, c.base.t0_milli);
        r.tc_rh = window_ratio(acc[metric_index(metric::humidity)].sum_milli,
                               acc[metric_index(metric::humidity)].count, c.base.rh0_milli);
        r.tc_co2 = window_ratio(acc[metric_index(metric::co2)].sum_milli, acc[metric_index(metric::co2)].count,
                                c.base.co2_0_milli);
        r.samples_t = acc[metric_index(metric::temperature)].count;
        r.samples_rh = acc[metric_index(metric::humidity)].count;
        r.samples_co2 = acc[metric_index(metric::co2)].count;
        r.tier_t = classify_metric(r.tc_t, c.bands.temperature);
        r.tier_rh = classify_metric(r.tc_rh, c.bands.humidity);
        r.tier_co2 = classify_metric(r.tc_co2, c.bands.co2);

        r.ep_src = carried_ep_src_;
        if (carried_ep_src_ == ep_source::defined)
            r.ep = carried_ep_;
        if (!r.tc_t.has_value())
            r.contractor_tier = tier::fail;  // no temperature data: no reward
        else if (carried_ep_src_ == ep_source::unavailable)
            r.contractor_tier = tier::reduced;
        else if (carried_ep_src_ == ep_source::empty_window)
            r.contractor_tier = tier::fail;
        else
            r.contractor_tier = c.policy.classify(carried_ep_, *r.tc_t);

        tier fm = fm_outcome(r.tier_t, r.tier_rh, r.tier_co2);
        r.fm_fraction = tier_fraction(fm, c.reduced_fraction);
        r.contractor_fraction = tier_fraction(r.contractor_tier, c.reduced_fraction);
        r.fm_reward = scale_floor(c.fm_fee_per_interval, r.fm_fraction);
        r.contractor_reward = scale_floor(c.contractor_fee_per_interval, r.contractor_fraction);

        amount total = r.fm_reward + r.contractor_reward;
        if (escrow_ < total)
            throw error("evaluate: escrow underfunded");  // ruled out by the funding precondition
        escrow_ -= total;
        accrual_fm_ += r.fm_reward;
        accrual_contractor_ += r.contractor_reward;
        results_.push_back(r);
        next_thermal_ += 1;
    }

    void settle_accruals(tx_context& ctx) {
        if (accrual_fm_ > 0) {
            ctx.transfer_value(contract_addr_, *facility_manager_, accrual_fm_);
            redeemed_fm_ += accrual_fm_;
            accrual_fm_ = 0;
        }
        if (accrual_contractor_ > 0) {
            ctx.transfer_value(contract_addr_, *contractor_, accrual_contractor_);
            redeemed_contractor_ += accrual_contractor_;
            accrual_contractor_ = 0;
        }
    }

    address owner_;
    address contract_addr_;
    lifecycle_state state_ = lifecycle_state::deployed;
    std::optional<address> building_owner_;
    std::optional<address> contractor_;
    std::optional<address> facility_manager_;
    std::optional<address> backend_;

    std::optional<case_params> case_;
    int64_t case_id_ = 0;
    std::map<std::string, metric> sensor_metric_;

    amount funded_ = 0;
    amount escrow_ = 0;
    amount refunded_ = 0;
    amount accrual_fm_ = 0;
    amount accrual_contractor_ = 0;
    amount redeemed_fm_ = 0;
    amount redeemed_contractor_ = 0;
    int64_t last_redeem_fm_ = 0;
    int64_t last_redeem_contractor_ = 0;

    std::vector<measurement> measurements_;
    std::array<int64_t, 4> last_ts_ = {std::numeric_limits<int64_t>::min(), std::numeric_limits<int64_t>::min(),
                                       std::numeric_limits<int64_t>::min(), std::numeric_limits<int64_t>::min()};
    std::vector<std::array<win_acc, 3>> thermal_acc_;
    std::vector<win_acc> energy_acc_;
    int64_t next_thermal_ = 0;
    int64_t next_energy_ = 0;
    ep_source carried_ep_src_ = ep_source::unavailable;
    double carried_ep_ = 0.0;

    std::vector<interval_result> results_;
};

}  // namespace perfcon
