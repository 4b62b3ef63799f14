#pragma once

#include "perfcon/config_json.hpp"
#include "perfcon/simulation.hpp"

namespace perfcon {

// Workspace persistence: the full simulation state round-trips through JSON
// so multi-step manual CLI use shares one code path with scripted scenarios.
// Doubles round-trip exactly (shortest-representation dump), amounts are
// decimal strings, so the state digest survives save/load bit for bit.

inline json address_to_json(const address& a) { return a.hex(); }

inline address address_from_json(const json& j) {
    auto a = address::from_hex(j.get_ref<const std::string&>());
    if (!a)
        throw error("snapshot: bad address " + j.dump());
    return *a;
}

inline json opt_ratio_to_json(const std::optional<double>& v) {
    if (!v)
        return nullptr;
    return *v;
}

inline std::optional<double> opt_ratio_from_json(const json& j) {
    if (j.is_null())
        return std::nullopt;
    return j.get<double>();
}

struct ledger_snapshot_access {
    static json save(const ledger& l) {
        json j;
        j["gas_price"] = amount_to_json(l.gas_price_);
        j["gas_schedule"] = gas_schedule_to_json(l.schedule_);
        j["clock"] = l.clock_;
        j["setup_open"] = l.setup_open_;
        j["addr_counter"] = l.addr_counter_;
        j["supply"] = amount_to_json(l.supply_);
        j["fee_sink"] = amount_to_json(l.fee_sink_);
        json genesis = json::array();
        for (const auto& [a, b] : l.genesis_)
            genesis.push_back(json::array({address_to_json(a), amount_to_json(b)}));
        j["genesis"] = genesis;
        json accounts = json::object();
        for (const auto& [a, b] : l.accounts_)
            accounts[a.hex()] = amount_to_json(b);
        j["accounts"] = accounts;
        json log = json::array();
        for (const transaction& tx : l.log_) {
            json transfers = json::array();
            for (const transfer& t : tx.transfers)
                transfers.push_back(
                    json::array({address_to_json(t.from), address_to_json(t.to), amount_to_json(t.value)}));
            log.push_back(json{{"seq", tx.seq},
                               {"kind", std::string(tx_kind_name(tx.kind))},
                               {"sender", address_to_json(tx.sender)},
                               {"transfers", transfers},
                               {"gas_used", tx.gas_used},
                               {"gas_price", amount_to_json(tx.gas_price)},
                               {"timestamp", tx.timestamp},
                               {"accepted", tx.accepted},
                               {"reason", std::string(reject_reason_name(tx.reason))}});
        }
        j["log"] = log;
        return j;
    }

    static ledger load(const json& j) {
        ledger l(amount_from_json(need(j, "gas_price", "ledger"), "gas_price"),
                 gas_schedule_from_json(need(j, "gas_schedule", "ledger")));
        l.clock_ = need(j, "clock", "ledger").get<int64_t>();
        l.setup_open_ = need(j, "setup_open", "ledger").get<bool>();
        l.addr_counter_ = need(j, "addr_counter", "ledger").get<uint64_t>();
        l.supply_ = amount_from_json(need(j, "supply", "ledger"), "supply");
        l.fee_sink_ = amount_from_json(need(j, "fee_sink", "ledger"), "fee_sink");
        for (const json& g : need(j, "genesis", "ledger"))
            l.genesis_.emplace_back(address_from_json(g[0]), amount_from_json(g[1], "genesis"));
        const json& accounts = need(j, "accounts", "ledger");
        for (auto it = accounts.begin(); it != accounts.end(); ++it) {
            auto a = address::from_hex(it.key());
            if (!a)
                throw error("snapshot: bad account key " + it.key());
            l.accounts_[*a] = amount_from_json(*it, "account");
        }
        for (const json& t : need(j, "log", "ledger")) {
            transaction tx;
            tx.seq = need(t, "seq", "tx").get<uint64_t>();
            auto k = parse_tx_kind(need(t, "kind", "tx").get_ref<const std::string&>());
            if (!k)
                throw error("snapshot: unknown tx kind");
            tx.kind = *k;
            tx.sender = address_from_json(need(t, "sender", "tx"));
            for (const json& tr : need(t, "transfers", "tx"))
                tx.transfers.push_back(transfer{address_from_json(tr[0]), address_from_json(tr[1]),
                                                amount_from_json(tr[2], "transfer")});
            tx.gas_used = need(t, "gas_used", "tx").get<int64_t>();
            tx.gas_price = amount_from_json(need(t, "gas_price", "tx"), "tx.gas_price");
            tx.timestamp = need(t, "timestamp", "tx").get<int64_t>();
            tx.accepted = need(t, "accepted", "tx").get<bool>();
            std::string reason = need(t, "reason", "tx").get<std::string>();
            for (int ri = 0; ri <= static_cast<int>(reject_reason::redemption_locked); ++ri)
                if (reason == reject_reason_name(static_cast<reject_reason>(ri)))
                    tx.reason = static_cast<reject_reason>(ri);
            l.log_.push_back(std::move(tx));
        }
        return l;
    }
};

struct contract_snapshot_access {
    static json save(const performance_contract& c) {
        json j;
        j["owner"] = address_to_json(c.owner_);
        j["contract_addr"] = address_to_json(c.contract_addr_);
        j["state"] = std::string(lifecycle_name(c.state_));
        auto opt_addr = [](const std::optional<address>& a) -> json {
            if (!a)
                return nullptr;
            return a->hex();
        };
        j["building_owner"] = opt_addr(c.building_owner_);
        j["contractor"] = opt_addr(c.contractor_);
        j["facility_manager"] = opt_addr(c.facility_manager_);
        j["backend"] = opt_addr(c.backend_);
        j["case"] = c.case_ ? case_to_json(*c.case_) : json(nullptr);
        j["case_id"] = c.case_id_;
        j["funded"] = amount_to_json(c.funded_);
        j["escrow"] = amount_to_json(c.escrow_);
        j["refunded"] = amount_to_json(c.refunded_);
        j["accrual_fm"] = amount_to_json(c.accrual_fm_);
        j["accrual_contractor"] = amount_to_json(c.accrual_contractor_);
        j["redeemed_fm"] = amount_to_json(c.redeemed_fm_);
        j["redeemed_contractor"] = amount_to_json(c.redeemed_contractor_);
        j["last_redeem_fm"] = c.last_redeem_fm_;
        j["last_redeem_contractor"] = c.last_redeem_contractor_;
        json ms = json::array();
        for (const measurement& m : c.measurements_)
            ms.push_back(json::array(
                {m.case_id, std::string(metric_name(m.kind)), m.sensor_id, m.timestamp, m.value_milli}));
        j["measurements"] = ms;
        j["next_thermal"] = c.next_thermal_;
        j["next_energy"] = c.next_energy_;
        j["carried_ep_src"] = static_cast<int>(c.carried_ep_src_);
        j["carried_ep"] = c.carried_ep_;
        json rs = json::array();
        for (const interval_result& r : c.results_) {
            rs.push_back(json{{"kind", r.kind == window_kind::thermal ? "thermal" : "energy"},
                              {"index", r.index},
                              {"t_begin", r.t_begin},
                              {"t_end", r.t_end},
                              {"ep", opt_ratio_to_json(r.ep)},
                              {"tc_t", opt_ratio_to_json(r.tc_t)},
                              {"tc_rh", opt_ratio_to_json(r.tc_rh)},
                              {"tc_co2", opt_ratio_to_json(r.tc_co2)},
                              {"ep_src", static_cast<int>(r.ep_src)},
                              {"tier_t", std::string(tier_name(r.tier_t))},
                              {"tier_rh", std::string(tier_name(r.tier_rh))},
                              {"tier_co2", std::string(tier_name(r.tier_co2))},
                              {"contractor_tier", std::string(tier_name(r.contractor_tier))},
                              {"fm_fraction", rational_to_json(r.fm_fraction)},
                              {"contractor_fraction", rational_to_json(r.contractor_fraction)},
                              {"fm_reward", amount_to_json(r.fm_reward)},
                              {"contractor_reward", amount_to_json(r.contractor_reward)},
                              {"samples_t", r.samples_t},
                              {"samples_rh", r.samples_rh},
                              {"samples_co2", r.samples_co2},
                              {"samples_energy", r.samples_energy}});
        }
        j["results"] = rs;
        return j;
    }

    static performance_contract load(const json& j) {
        performance_contract c(address_from_json(need(j, "owner", "contract")),
                               address_from_json(need(j, "contract_addr", "contract")));
        std::string st = need(j, "state", "contract").get<std::string>();
        for (int si = 0; si <= static_cast<int>(lifecycle_state::deactivated); ++si)
            if (st == lifecycle_name(static_cast<lifecycle_state>(si)))
                c.state_ = static_cast<lifecycle_state>(si);
        auto opt_addr = [](const json& v) -> std::optional<address> {
            if (v.is_null())
                return std::nullopt;
            return address_from_json(v);
        };
        c.building_owner_ = opt_addr(need(j, "building_owner", "contract"));
        c.contractor_ = opt_addr(need(j, "contractor", "contract"));
        c.facility_manager_ = opt_addr(need(j, "facility_manager", "contract"));
        c.backend_ = opt_addr(need(j, "backend", "contract"));
        const json& cs = need(j, "case", "contract");
        if (!cs.is_null())
            c.case_ = case_from_json(cs);
        c.case_id_ = need(j, "case_id", "contract").get<int64_t>();
        c.funded_ = amount_from_json(need(j, "funded", "contract"), "funded");
        c.escrow_ = amount_from_json(need(j, "escrow", "contract"), "escrow");
        c.refunded_ = amount_from_json(need(j, "refunded", "contract"), "refunded");
        c.accrual_fm_ = amount_from_json(need(j, "accrual_fm", "contract"), "accrual_fm");
        c.accrual_contractor_ = amount_from_json(need(j, "accrual_contractor", "contract"), "accrual_contractor");
        c.redeemed_fm_ = amount_from_json(need(j, "redeemed_fm", "contract"), "redeemed_fm");
        c.redeemed_contractor_ = amount_from_json(need(j, "redeemed_contractor", "contract"), "redeemed_contractor");
        c.last_redeem_fm_ = need(j, "last_redeem_fm", "contract").get<int64_t>();
        c.last_redeem_contractor_ = need(j, "last_redeem_contractor", "contract").get<int64_t>();
        c.next_thermal_ = need(j, "next_thermal", "contract").get<int64_t>();
        c.next_energy_ = need(j, "next_energy", "contract").get<int64_t>();
        c.carried_ep_src_ = static_cast<ep_source>(need(j, "carried_ep_src", "contract").get<int>());
        c.carried_ep_ = need(j, "carried_ep", "contract").get<double>();

        if (c.case_) {
            for (metric m : all_metrics)
                for (const std::string& id : c.case_->ids_of(m))
                    c.sensor_metric_.emplace(id, m);
            c.thermal_acc_.assign(static_cast<size_t>(c.case_->thermal_window_count()), {});
            c.energy_acc_.assign(static_cast<size_t>(c.case_->energy_window_count()), {});
        }
        // Measurements re-accumulate into window sums; the aggregates are a
        // pure function of the stored log so they are not serialized.
        for (const json& m : need(j, "measurements", "contract")) {
            measurement mm;
            mm.case_id = m[0].get<int64_t>();
            auto mk = parse_metric(m[1].get_ref<const std::string&>());
            if (!mk)
                throw error("snapshot: unknown metric in measurement");
            mm.kind = *mk;
            mm.sensor_id = m[2].get<std::string>();
            mm.timestamp = m[3].get<int64_t>();
            mm.value_milli = m[4].get<int64_t>();
            c.file_measurement(mm);
        }
        for (const json& r : need(j, "results", "contract")) {
            interval_result ir;
            ir.case_id = c.case_id_;
            ir.kind = need(r, "kind", "result").get<std::string>() == "thermal" ? window_kind::thermal
                                                                                : window_kind::energy;
            ir.index = need(r, "index", "result").get<int64_t>();
            ir.t_begin = need(r, "t_begin", "result").get<int64_t>();
            ir.t_end = need(r, "t_end", "result").get<int64_t>();
            ir.ep = opt_ratio_from_json(need(r, "ep", "result"));
            ir.tc_t = opt_ratio_from_json(need(r, "tc_t", "result"));
            ir.tc_rh = opt_ratio_from_json(need(r, "tc_rh", "result"));
            ir.tc_co2 = opt_ratio_from_json(need(r, "tc_co2", "result"));
            ir.ep_src = static_cast<ep_source>(need(r, "ep_src", "result").get<int>());
            auto get_tier = [&](const char* key) {
                auto t = parse_tier(need(r, key, "result").get_ref<const std::string&>());
                if (!t)
                    throw error("snapshot: unknown tier");
                return *t;
            };
            ir.tier_t = get_tier("tier_t");
            ir.tier_rh = get_tier("tier_rh");
            ir.tier_co2 = get_tier("tier_co2");
            ir.contractor_tier = get_tier("contractor_tier");
            ir.fm_fraction = rational_from_json(need(r, "fm_fraction", "result"));
            ir.contractor_fraction = rational_from_json(need(r, "contractor_fraction", "result"));
            ir.fm_reward = amount_from_json(need(r, "fm_reward", "result"), "fm_reward");
            ir.contractor_reward = amount_from_json(need(r, "contractor_reward", "result"), "contractor_reward");
            ir.samples_t = need(r, "samples_t", "result").get<int64_t>();
            ir.samples_rh = need(r, "samples_rh", "result").get<int64_t>();
            ir.samples_co2 = need(r, "samples_co2", "result").get<int64_t>();
            ir.samples_energy = need(r, "samples_energy", "result").get<int64_t>();
            c.results_.push_back(std::move(ir));
        }
        return c;
    }
};

struct simulation_snapshot_access {
    static json save(const simulation& sim) {
        json j;
        j["ledger"] = ledger_snapshot_access::save(sim.led_);
        j["contract"] = sim.pc_ ? contract_snapshot_access::save(*sim.pc_) : json(nullptr);
        j["contract_addr"] = address_to_json(sim.contract_addr_);
        return j;
    }

    static std::unique_ptr<simulation> load(const json& j) {
        auto sim = std::make_unique<simulation>();
        sim->led_ = ledger_snapshot_access::load(need(j, "ledger", "snapshot"));
        const json& c = need(j, "contract", "snapshot");
        if (!c.is_null())
            sim->pc_ = contract_snapshot_access::load(c);
        sim->contract_addr_ = address_from_json(need(j, "contract_addr", "snapshot"));
        return sim;
    }
};

inline json simulation_to_json(const simulation& sim) { return simulation_snapshot_access::save(sim); }
inline std::unique_ptr<simulation> simulation_from_json(const json& j) { return simulation_snapshot_access::load(j); }

}  // namespace perfcon
