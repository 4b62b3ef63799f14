#pragma once

#include <optional>

#include "perfcon/contract.hpp"
#include "perfcon/ledger.hpp"

namespace perfcon {

/// Couples the gas-metered ledger with the contract state machine: every
/// mutating contract call becomes one fee-bearing transaction, and window
/// evaluations triggered by an accepted call are logged as EvaluateInterval
/// transactions paid by the caller that triggered them.
class simulation {
public:
    explicit simulation(amount gas_price = 20 * gigaunit, gas_schedule schedule = {})
        : led_(gas_price, schedule) {}

    ledger& led() { return led_; }
    const ledger& led() const { return led_; }
    performance_contract* contract() { return pc_ ? &*pc_ : nullptr; }
    const performance_contract* contract() const { return pc_ ? &*pc_ : nullptr; }
    const address& contract_address() const { return contract_addr_; }

    receipt deploy(const address& deployer) {
        return led_.apply(deployer, tx_kind::deploy, [&](tx_context&) -> std::optional<reject_reason> {
            if (pc_)
                return reject_reason::wrong_state;
            contract_addr_ = led_.create_account(0);
            pc_.emplace(deployer, contract_addr_);
            return std::nullopt;
        });
    }

    receipt add_role(const address& caller, const address& grantee, role r) {
        return led_.apply(caller, tx_kind::add_role, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            return pc_->add_role(caller, grantee, r, ctx);
        });
    }

    receipt create_case(const address& caller, const case_params& params, int64_t* case_id_out = nullptr) {
        return led_.apply(caller, tx_kind::create_case, [&](tx_context&) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            return pc_->create_case(caller, params, case_id_out);
        });
    }

    receipt fund_escrow(const address& caller, amount value) {
        return led_.apply(caller, tx_kind::fund_escrow, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            return pc_->fund_escrow(caller, value, ctx);
        });
    }

    receipt register_backend(const address& caller, const address& backend) {
        return led_.apply(caller, tx_kind::register_backend, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            return pc_->register_backend(caller, backend, ctx);
        });
    }

    /// Windows that closed at or before the measurement's timestamp are
    /// evaluated first, then the sample itself is filed. A submission that
    /// would be rejected triggers no evaluation at all.
    receipt submit_measurement(const address& caller, const measurement& m) {
        if (pc_ && !pc_->validate_measurement(caller, m).has_value())
            sweep(caller, m.timestamp);
        return led_.apply(caller, tx_kind::submit_measurement, [&](tx_context&) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            if (auto r = pc_->validate_measurement(caller, m))
                return r;
            pc_->file_measurement(m);
            return std::nullopt;
        });
    }

    receipt redeem(const address& caller, amount* payout_out = nullptr) {
        if (pc_ && !pc_->redeem_validate(caller, led_.clock()).has_value())
            sweep(caller, led_.clock());
        return led_.apply(caller, tx_kind::redeem, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            if (auto r = pc_->redeem_validate(caller, ctx.clock()))
                return r;
            amount payout = pc_->redeem_commit(caller, ctx);
            if (payout_out)
                *payout_out = payout;
            return std::nullopt;
        });
    }

    receipt release_escrow(const address& caller, amount* refund_out = nullptr) {
        if (pc_ && !pc_->release_validate(caller, led_.clock()).has_value())
            sweep(caller, led_.clock());
        return led_.apply(caller, tx_kind::release_escrow, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            if (auto r = pc_->release_validate(caller, ctx.clock()))
                return r;
            amount refund = pc_->release_commit(ctx);
            if (refund_out)
                *refund_out = refund;
            return std::nullopt;
        });
    }

    receipt deactivate(const address& caller) {
        return led_.apply(caller, tx_kind::deactivate, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (!pc_)
                return reject_reason::wrong_state;
            if (auto r = pc_->deactivate_validate(caller))
                return r;
            pc_->deactivate_commit(ctx);
            return std::nullopt;
        });
    }

    /// Read-only, never logged, never charged.
    status_snapshot status(int64_t case_id) const {
        if (!pc_)
            throw error("status: no contract deployed");
        return pc_->status(case_id);
    }

    uint64_t contract_digest() const { return pc_ ? pc_->digest() : 0; }

    uint64_t state_digest() const {
        fnv1a64 h;
        h.u64(led_.digest());
        h.u64(contract_digest());
        return h.state;
    }

    /// Exact-integer conservation: total supply is constant, the contract
    /// account physically holds escrow plus pending accruals, and the funded
    /// amount splits exactly into escrow, accruals, redemptions and refunds.
    void check_conservation() const {
        if (led_.circulating() != led_.genesis_supply())
            throw error("conservation: ledger supply drifted");
        if (pc_) {
            if (!pc_->escrow_conserved())
                throw error("conservation: escrow does not balance");
            amount held = led_.balance(contract_addr_);
            amount expected = pc_->escrow() + pc_->accrual(role::facility_manager) + pc_->accrual(role::contractor);
            if (held != expected)
                throw error("conservation: contract account out of sync");
        }
    }

private:
    void sweep(const address& payer, int64_t limit) {
        while (auto w = pc_->next_due_window(limit)) {
            led_.apply(payer, tx_kind::evaluate_interval, [&](tx_context&) -> std::optional<reject_reason> {
                pc_->evaluate_window(w->first, w->second);
                return std::nullopt;
            });
        }
    }

    friend struct simulation_snapshot_access;

    ledger led_;
    std::optional<performance_contract> pc_;
    address contract_addr_{};
};

}  // namespace perfcon
