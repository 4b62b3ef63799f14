#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "perfcon/costs.hpp"
#include "perfcon/data.hpp"
#include "perfcon/oracle.hpp"
#include "perfcon/simulation.hpp"

namespace perfcon {

/// Where the oracle reads its series from: a CSV file on disk or a synthetic
/// generation recipe.
struct dataset_source {
    std::optional<std::string> csv_path;
    std::optional<synthetic_spec> synthetic;

    bool valid() const { return csv_path.has_value() != synthetic.has_value(); }
};

/// A full scripted run: actors and balances, the case to create, the data
/// source, the sampling policy and one master seed. Time is the logical
/// clock only; there is no ambient randomness anywhere.
struct scenario_config {
    uint64_t seed = 0;
    amount gas_price = 20 * gigaunit;
    gas_schedule schedule;
    std::map<std::string, amount> actors;  // owner, building_owner, contractor, facility_manager, backend
    case_params case_cfg;
    sampling_policy sampling;
    dataset_source dataset;
    std::optional<amount> fund_amount;           // default: exact worst-case cover
    bool skip_funding = false;                   // fault injection: leave the escrow step out
    std::optional<int64_t> deactivate_at_s;      // mid-run deactivation, for fault drills
    double report_gas_price_gigaunits = 0.0;     // 0: use the run's own gas price
    double report_fiat_rate = 0.0;

    static constexpr const char* required_actors[5] = {"owner", "building_owner", "contractor",
                                                       "facility_manager", "backend"};
};

struct scenario_summary {
    bool completed = false;          // reached escrow release
    bool deactivated = false;        // stopped by a scripted deactivation
    std::string failed_step;         // first step that rejected or threw
    std::string failure_reason;
    lifecycle_state final_state = lifecycle_state::deployed;
    uint64_t state_digest = 0;
    int64_t measurement_count = 0;
    submission_report oracle_report;
    amount payout_fm = 0;            // cumulative, auto-settlements included
    amount payout_contractor = 0;
    amount refund = 0;
    int64_t payout_events = 0;       // redemption rounds with at least one accepted redeem
    int64_t total_gas = 0;
    double submit_gas_share = 0.0;
    cost_report costs;
    std::map<std::string, std::string> actor_addresses;  // name -> hex
};

struct scenario_run {
    scenario_summary summary;
    std::unique_ptr<simulation> sim;
    building_dataset dataset;
    schedule plan;
};

/// Executes the whole workflow in order: deploy, assign roles, create the
/// case, fund the escrow, register the back-end, run the oracle with
/// redemption rounds at each redemption boundary, then release the escrow.
/// Any rejected step aborts with the step name and reason. after_tx, when
/// set, runs after every logged transaction (used by conservation drills).
inline scenario_run run_scenario(const scenario_config& cfg,
                                 const std::function<void(const simulation&)>& after_tx = {}) {
    scenario_run out;
    out.sim = std::make_unique<simulation>(cfg.gas_price, cfg.schedule);
    simulation& sim = *out.sim;
    scenario_summary& sum = out.summary;

    auto finish = [&]() -> scenario_run&& {
        sim.led().set_observer({});
        if (sim.contract()) {
            const performance_contract& pc = *sim.contract();
            sum.final_state = pc.state();
            sum.measurement_count = static_cast<int64_t>(pc.measurements().size());
            sum.payout_fm = pc.redeemed(role::facility_manager);
            sum.payout_contractor = pc.redeemed(role::contractor);
            sum.refund = pc.refunded();
        }
        sum.state_digest = sim.state_digest();
        gas_totals_result gt = sim.led().gas_totals();
        sum.total_gas = gt.total;
        sum.submit_gas_share =
            gt.total == 0 ? 0.0
                          : static_cast<double>(gt.of(tx_kind::submit_measurement)) / static_cast<double>(gt.total);
        double price = cfg.report_gas_price_gigaunits > 0.0
                           ? cfg.report_gas_price_gigaunits
                           : static_cast<double>(static_cast<int64_t>(cfg.gas_price / gigaunit));
        sum.costs = build_cost_report(sim.led(), price, cfg.report_fiat_rate);
        return std::move(out);
    };
    auto fail = [&](const std::string& step, const std::string& reason) {
        sum.failed_step = step;
        sum.failure_reason = reason;
    };
    auto fail_rx = [&](const std::string& step, const receipt& r) {
        fail(step, std::string(reject_reason_name(r.reason)));
    };

    // actors
    std::map<std::string, address> addr;
    for (const char* name : scenario_config::required_actors) {
        auto it = cfg.actors.find(name);
        if (it == cfg.actors.end()) {
            fail("setup", std::string("missing actor ") + name);
            return finish();
        }
        addr[name] = sim.led().create_account(it->second);
        sum.actor_addresses[name] = addr[name].hex();
    }
    if (after_tx)
        sim.led().set_observer([&sim, after_tx](const transaction&) { after_tx(sim); });

    // a) deploy and roles
    receipt r = sim.deploy(addr["owner"]);
    if (!r.accepted) {
        fail_rx("deploy", r);
        return finish();
    }
    const std::pair<const char*, role> grants[] = {{"building_owner", role::building_owner},
                                                   {"contractor", role::contractor},
                                                   {"facility_manager", role::facility_manager}};
    for (auto [name, who] : grants) {
        r = sim.add_role(addr["owner"], addr[name], who);
        if (!r.accepted) {
            fail_rx("role_add", r);
            return finish();
        }
    }

    // b) case, escrow, back-end
    r = sim.create_case(addr["owner"], cfg.case_cfg);
    if (!r.accepted) {
        fail_rx("case_create", r);
        return finish();
    }
    if (!cfg.skip_funding) {
        amount fund = cfg.fund_amount.value_or(cfg.case_cfg.worst_case_escrow());
        r = sim.fund_escrow(addr["building_owner"], fund);
        if (!r.accepted) {
            fail_rx("fund", r);
            return finish();
        }
    }
    r = sim.register_backend(addr["owner"], addr["backend"]);
    if (!r.accepted) {
        fail_rx("backend_register", r);
        return finish();
    }

    // data + plan
    try {
        if (!cfg.dataset.valid())
            throw error("dataset source must be exactly one of csv or synthetic");
        out.dataset = cfg.dataset.csv_path ? load_csv_file(*cfg.dataset.csv_path, cfg.case_cfg.building_id)
                                           : generate_synthetic(*cfg.dataset.synthetic, cfg.seed);
        sampling_policy pol = cfg.sampling;
        pol.seed = cfg.seed;
        out.plan = plan_schedule(pol, cfg.case_cfg.start_time_s, cfg.case_cfg.duration_s);
    } catch (const error& e) {
        fail("dataset", e.what());
        return finish();
    }

    const int64_t start = cfg.case_cfg.start_time_s;
    const int64_t horizon = start + cfg.case_cfg.duration_s;
    if (sim.led().clock() < start)
        sim.led().set_clock(start);

    // c) oracle-driven execution with d) redemption rounds at each boundary
    int64_t next_boundary = start + cfg.case_cfg.redemption_interval_s;
    bool deactivation_pending = cfg.deactivate_at_s.has_value();
    std::string abort_step;

    auto redeem_round = [&]() {
        bool any = false;
        for (const char* name : {"facility_manager", "contractor"}) {
            receipt rr = sim.redeem(addr[name]);
            any = any || rr.accepted;
        }
        sum.payout_events += any ? 1 : 0;
    };
    auto do_deactivate = [&](int64_t at) {
        if (sim.led().clock() < at)
            sim.led().set_clock(at);
        receipt rd = sim.deactivate(addr["owner"]);
        if (rd.accepted)
            sum.deactivated = true;
        else
            abort_step = "deactivate:" + std::string(reject_reason_name(rd.reason));
        deactivation_pending = false;
    };

    try {
        sum.oracle_report = run_oracle(sim, addr["backend"], out.plan, out.dataset, cfg.seed, [&](int64_t t) {
            if (deactivation_pending && t >= *cfg.deactivate_at_s)
                do_deactivate(*cfg.deactivate_at_s);
            while (next_boundary <= horizon && next_boundary < t) {
                if (sim.led().clock() < next_boundary)
                    sim.led().set_clock(next_boundary);
                if (!sum.deactivated)
                    redeem_round();
                next_boundary += cfg.case_cfg.redemption_interval_s;
            }
        });
    } catch (const error& e) {
        fail("oracle_run", e.what());
        return finish();
    }
    if (!abort_step.empty()) {
        fail(abort_step.substr(0, abort_step.find(':')), abort_step.substr(abort_step.find(':') + 1));
        return finish();
    }

    if (deactivation_pending && *cfg.deactivate_at_s <= horizon)
        do_deactivate(*cfg.deactivate_at_s);
    if (sim.led().clock() < horizon)
        sim.led().set_clock(horizon);
    while (next_boundary <= horizon) {
        if (!sum.deactivated)
            redeem_round();
        next_boundary += cfg.case_cfg.redemption_interval_s;
    }

    // e) release the remaining escrow
    if (!sum.deactivated) {
        r = sim.release_escrow(addr["building_owner"]);
        if (!r.accepted) {
            fail_rx("release", r);
            return finish();
        }
        sum.completed = true;
    }
    return finish();
}

}  // namespace perfcon
