#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "perfcon/util.hpp"

namespace perfcon {

/// Opaque 32-byte account identifier, rendered as lowercase hex.
struct address {
    std::array<uint8_t, 32> bytes{};

    bool is_zero() const {
        for (uint8_t b : bytes)
            if (b != 0)
                return false;
        return true;
    }

    std::string hex() const {
        static const char digits[] = "0123456789abcdef";
        std::string out;
        out.reserve(64);
        for (uint8_t b : bytes) {
            out.push_back(digits[b >> 4]);
            out.push_back(digits[b & 0xf]);
        }
        return out;
    }

    static std::optional<address> from_hex(std::string_view s) {
        if (s.size() != 64)
            return std::nullopt;
        address a;
        for (size_t i = 0; i < 32; ++i) {
            auto nib = [](char c) -> int {
                if (c >= '0' && c <= '9') return c - '0';
                if (c >= 'a' && c <= 'f') return c - 'a' + 10;
                return -1;
            };
            int hi = nib(s[2 * i]);
            int lo = nib(s[2 * i + 1]);
            if (hi < 0 || lo < 0)
                return std::nullopt;
            a.bytes[i] = static_cast<uint8_t>(hi << 4 | lo);
        }
        return a;
    }

    friend auto operator<=>(const address&, const address&) = default;
};

enum class tx_kind : uint8_t {
    deploy,
    add_role,
    create_case,
    fund_escrow,
    register_backend,
    submit_measurement,
    evaluate_interval,
    redeem,
    release_escrow,
    deactivate,
};

constexpr std::array<tx_kind, 10> all_tx_kinds = {
    tx_kind::deploy,          tx_kind::add_role,       tx_kind::create_case,
    tx_kind::fund_escrow,     tx_kind::register_backend, tx_kind::submit_measurement,
    tx_kind::evaluate_interval, tx_kind::redeem,       tx_kind::release_escrow,
    tx_kind::deactivate,
};

constexpr std::string_view tx_kind_name(tx_kind k) {
    switch (k) {
    case tx_kind::deploy: return "Deploy";
    case tx_kind::add_role: return "AddRole";
    case tx_kind::create_case: return "CreateCase";
    case tx_kind::fund_escrow: return "FundEscrow";
    case tx_kind::register_backend: return "RegisterBackend";
    case tx_kind::submit_measurement: return "SubmitMeasurement";
    case tx_kind::evaluate_interval: return "EvaluateInterval";
    case tx_kind::redeem: return "Redeem";
    case tx_kind::release_escrow: return "ReleaseEscrow";
    case tx_kind::deactivate: return "Deactivate";
    }
    return "?";
}

inline std::optional<tx_kind> parse_tx_kind(std::string_view s) {
    for (tx_kind k : all_tx_kinds)
        if (s == tx_kind_name(k))
            return k;
    return std::nullopt;
}

/// Gas charged per transaction kind. Defaults are calibrated so a two-day
/// replication run reproduces the measured cost profile: deployment pinned
/// at 4,249,797 gas, data submissions at 360,000 gas apiece, and the two
/// other heavyweights (case registration with all sensor ids, final payout
/// calculation at escrow release) in the millions.
struct gas_schedule {
    std::array<int64_t, 10> gas = {
        4'249'797,  // Deploy
        150'000,    // AddRole
        4'500'000,  // CreateCase
        150'000,    // FundEscrow
        150'000,    // RegisterBackend
        360'000,    // SubmitMeasurement
        150'000,    // EvaluateInterval
        150'000,    // Redeem
        4'000'000,  // ReleaseEscrow
        150'000,    // Deactivate
    };

    int64_t of(tx_kind k) const { return gas[static_cast<size_t>(k)]; }
    int64_t& of(tx_kind k) { return gas[static_cast<size_t>(k)]; }

    bool valid() const {
        for (int64_t g : gas)
            if (g <= 0)
                return false;
        return true;
    }

    friend bool operator==(const gas_schedule&, const gas_schedule&) = default;
};

enum class reject_reason : uint8_t {
    none,
    unauthorized,
    already_assigned,
    wrong_state,
    unknown_address,
    unknown_case,
    unknown_sensor,
    invalid_role,
    invalid_baseline,
    invalid_sensor_list,
    invalid_interval,
    invalid_duration,
    invalid_fee,
    invalid_fraction,
    invalid_params,
    insufficient_escrow,
    insufficient_balance,
    out_of_range,
    out_of_window,
    timestamp_regression,
    window_closed,
    redemption_locked,
};

constexpr std::string_view reject_reason_name(reject_reason r) {
    switch (r) {
    case reject_reason::none: return "none";
    case reject_reason::unauthorized: return "unauthorized";
    case reject_reason::already_assigned: return "already_assigned";
    case reject_reason::wrong_state: return "wrong_state";
    case reject_reason::unknown_address: return "unknown_address";
    case reject_reason::unknown_case: return "unknown_case";
    case reject_reason::unknown_sensor: return "unknown_sensor";
    case reject_reason::invalid_role: return "invalid_role";
    case reject_reason::invalid_baseline: return "invalid_baseline";
    case reject_reason::invalid_sensor_list: return "invalid_sensor_list";
    case reject_reason::invalid_interval: return "invalid_interval";
    case reject_reason::invalid_duration: return "invalid_duration";
    case reject_reason::invalid_fee: return "invalid_fee";
    case reject_reason::invalid_fraction: return "invalid_fraction";
    case reject_reason::invalid_params: return "invalid_params";
    case reject_reason::insufficient_escrow: return "insufficient_escrow";
    case reject_reason::insufficient_balance: return "insufficient_balance";
    case reject_reason::out_of_range: return "out_of_range";
    case reject_reason::out_of_window: return "out_of_window";
    case reject_reason::timestamp_regression: return "timestamp_regression";
    case reject_reason::window_closed: return "window_closed";
    case reject_reason::redemption_locked: return "redemption_locked";
    }
    return "?";
}

struct transfer {
    address from;
    address to;
    amount value = 0;

    friend bool operator==(const transfer&, const transfer&) = default;
};

struct transaction {
    uint64_t seq = 0;
    tx_kind kind = tx_kind::deploy;
    address sender;
    std::vector<transfer> transfers;  // applied only when accepted
    int64_t gas_used = 0;
    amount gas_price = 0;
    int64_t timestamp = 0;
    bool accepted = true;
    reject_reason reason = reject_reason::none;

    amount fee() const { return static_cast<amount>(gas_used) * gas_price; }
};

struct receipt {
    uint64_t seq = 0;
    bool accepted = true;
    reject_reason reason = reject_reason::none;
    int64_t gas_used = 0;
    amount fee = 0;
};

struct gas_totals_result {
    int64_t total = 0;
    std::array<int64_t, 10> by_kind{};

    int64_t of(tx_kind k) const { return by_kind[static_cast<size_t>(k)]; }
};

class ledger;

/// Execution context handed to a transaction body. Transfers requested here
/// take effect immediately; bodies must finish all validation before moving
/// money, because a body that rejects after transferring corrupts the
/// no-state-change-on-rejection contract (enforced by an internal check).
class tx_context {
public:
    tx_context(ledger& led, transaction& tx) : led_(led), tx_(tx) {}

    int64_t clock() const;
    bool account_exists(const address& a) const;
    amount balance(const address& a) const;
    void transfer_value(const address& from, const address& to, amount value);

private:
    ledger& led_;
    transaction& tx_;
};

/// Simulated gas-metered account book with an append-only transaction log.
/// Every state change flows through apply() as a fee-bearing transaction;
/// rejected transactions still pay their fee but change nothing else.
class ledger {
public:
    explicit ledger(amount gas_price = 20 * gigaunit, gas_schedule schedule = {})
        : gas_price_(gas_price), schedule_(schedule) {
        if (gas_price_ <= 0 || !schedule_.valid())
            throw error("ledger: gas price and schedule entries must be positive");
    }

    // --- setup -------------------------------------------------------------

    /// New unique account. Nonzero starting balances are only possible while
    /// the ledger is in its setup phase (before the first transaction).
    address create_account(amount initial_balance) {
        if (initial_balance < 0)
            throw error("create_account: negative balance");
        if (!setup_open_ && initial_balance != 0)
            throw error("create_account: setup phase closed, cannot mint");
        address a = next_address();
        accounts_.emplace(a, initial_balance);
        genesis_.emplace_back(a, initial_balance);
        supply_ += initial_balance;
        return a;
    }

    bool setup_open() const { return setup_open_; }

    // --- clock -------------------------------------------------------------

    int64_t clock() const { return clock_; }

    void set_clock(int64_t t) {
        if (t < clock_)
            throw error("set_clock: time went backwards");
        clock_ = t;
    }

    // --- transactions ------------------------------------------------------

    /// Submit a fee-bearing transaction. The body performs the contract-level
    /// work and returns a reject reason, or nullopt on acceptance. The fee is
    /// debited either way; an unknown sender or a sender that cannot pay the
    /// fee is an error and nothing is logged.
    template <typename Body>
    receipt apply(const address& sender, tx_kind kind, Body&& body) {
        auto it = accounts_.find(sender);
        if (it == accounts_.end())
            throw error("submit_transaction: unknown sender " + sender.hex());
        int64_t gas = schedule_.of(kind);
        amount fee = static_cast<amount>(gas) * gas_price_;
        if (it->second < fee)
            throw error("submit_transaction: sender cannot cover the fee");
        setup_open_ = false;

        transaction tx;
        tx.seq = log_.size();
        tx.kind = kind;
        tx.sender = sender;
        tx.gas_used = gas;
        tx.gas_price = gas_price_;
        tx.timestamp = clock_;

        it->second -= fee;
        fee_sink_ += fee;

        tx_context ctx(*this, tx);
        std::optional<reject_reason> rejected = body(ctx);
        if (rejected.has_value()) {
            if (!tx.transfers.empty())
                throw error("internal: rejected transaction moved value");
            tx.accepted = false;
            tx.reason = *rejected;
        }
        log_.push_back(tx);
        receipt r{tx.seq, tx.accepted, tx.reason, tx.gas_used, fee};
        if (observer_)
            observer_(log_.back());
        return r;
    }

    // --- queries -----------------------------------------------------------

    bool account_exists(const address& a) const { return accounts_.count(a) != 0; }

    amount balance(const address& a) const {
        auto it = accounts_.find(a);
        if (it == accounts_.end())
            throw error("balance: unknown account " + a.hex());
        return it->second;
    }

    amount fee_sink() const { return fee_sink_; }
    amount gas_price() const { return gas_price_; }
    const gas_schedule& schedule() const { return schedule_; }
    const std::vector<transaction>& log() const { return log_; }
    const std::map<address, amount>& accounts() const { return accounts_; }
    const std::vector<std::pair<address, amount>>& genesis() const { return genesis_; }

    /// Total supply fixed at setup; conservation means account balances plus
    /// the fee sink always sum to exactly this.
    amount genesis_supply() const { return supply_; }

    amount circulating() const {
        amount sum = fee_sink_;
        for (const auto& [a, b] : accounts_)
            sum += b;
        return sum;
    }

    gas_totals_result gas_totals() const {
        gas_totals_result r;
        for (const transaction& tx : log_) {
            r.total += tx.gas_used;
            r.by_kind[static_cast<size_t>(tx.kind)] += tx.gas_used;
        }
        return r;
    }

    /// Stable hash over (accounts sorted by address, fee sink, full log).
    uint64_t digest() const {
        fnv1a64 h;
        h.u64(accounts_.size());
        for (const auto& [a, b] : accounts_) {  // std::map iterates sorted
            h.bytes(a.bytes.data(), a.bytes.size());
            h.i128(b);
        }
        h.i128(fee_sink_);
        h.u64(log_.size());
        for (const transaction& tx : log_) {
            h.u64(tx.seq);
            h.u8(static_cast<uint8_t>(tx.kind));
            h.bytes(tx.sender.bytes.data(), tx.sender.bytes.size());
            h.u64(tx.transfers.size());
            for (const transfer& t : tx.transfers) {
                h.bytes(t.from.bytes.data(), t.from.bytes.size());
                h.bytes(t.to.bytes.data(), t.to.bytes.size());
                h.i128(t.value);
            }
            h.i64(tx.gas_used);
            h.i128(tx.gas_price);
            h.i64(tx.timestamp);
            h.u8(tx.accepted ? 1 : 0);
            h.u8(static_cast<uint8_t>(tx.reason));
        }
        return h.state;
    }

    /// Line-delimited export: seq,kind,sender,gas_used,fee,status,timestamp
    void export_log(std::ostream& os) const {
        for (const transaction& tx : log_) {
            os << tx.seq << ',' << tx_kind_name(tx.kind) << ',' << tx.sender.hex() << ',' << tx.gas_used << ','
               << amount_to_string(tx.fee()) << ','
               << (tx.accepted ? std::string("accepted")
                               : "rejected(" + std::string(reject_reason_name(tx.reason)) + ")")
               << ',' << tx.timestamp << '\n';
        }
    }

    /// Mechanically re-applies a log against the genesis balances; the result
    /// must reproduce the original ledger digest bit for bit.
    static ledger replay(const std::vector<std::pair<address, amount>>& genesis,
                         const std::vector<transaction>& log, amount gas_price, const gas_schedule& schedule) {
        ledger fresh(gas_price, schedule);
        // Re-create genesis accounts in order; addresses are deterministic so
        // they come out byte-identical.
        for (const auto& [a, bal] : genesis) {
            address got = fresh.create_account(bal);
            if (!(got == a))
                throw error("replay: address sequence diverged");
        }
        for (const transaction& tx : log) {
            if (tx.seq != fresh.log_.size())
                throw error("replay: log has a sequence gap");
            fresh.setup_open_ = false;
            auto it = fresh.accounts_.find(tx.sender);
            if (it == fresh.accounts_.end())
                throw error("replay: unknown sender in log");
            amount fee = tx.fee();
            it->second -= fee;
            fresh.fee_sink_ += fee;
            if (tx.accepted) {
                for (const transfer& t : tx.transfers) {
                    fresh.accounts_.at(t.from) -= t.value;
                    fresh.accounts_.at(t.to) += t.value;
                }
            }
            if (tx.timestamp < fresh.clock_)
                throw error("replay: timestamps regress");
            fresh.clock_ = tx.timestamp;
            fresh.log_.push_back(tx);
        }
        return fresh;
    }

    using observer_fn = std::function<void(const transaction&)>;
    void set_observer(observer_fn fn) { observer_ = std::move(fn); }

private:
    friend class tx_context;
    friend struct ledger_snapshot_access;

    address next_address() {
        // Deterministic, collision-free: hash of a per-ledger counter.
        address a;
        uint64_t st = 0x7065726663306e00ull ^ ++addr_counter_;
        for (int i = 0; i < 4; ++i) {
            uint64_t w = splitmix64(st);
            for (int j = 0; j < 8; ++j)
                a.bytes[static_cast<size_t>(8 * i + j)] = static_cast<uint8_t>(w >> (8 * j));
        }
        return a;
    }

    std::map<address, amount> accounts_;
    amount fee_sink_ = 0;
    std::vector<transaction> log_;
    amount gas_price_;
    gas_schedule schedule_;
    int64_t clock_ = 0;
    bool setup_open_ = true;
    uint64_t addr_counter_ = 0;
    amount supply_ = 0;
    std::vector<std::pair<address, amount>> genesis_;
    observer_fn observer_;
};

inline int64_t tx_context::clock() const { return led_.clock_; }

inline bool tx_context::account_exists(const address& a) const { return led_.accounts_.count(a) != 0; }

inline amount tx_context::balance(const address& a) const { return led_.balance(a); }

inline void tx_context::transfer_value(const address& from, const address& to, amount value) {
    if (value < 0)
        throw error("transfer: negative value");
    auto fit = led_.accounts_.find(from);
    auto tit = led_.accounts_.find(to);
    if (fit == led_.accounts_.end() || tit == led_.accounts_.end())
        throw error("transfer: unknown account");
    if (fit->second < value)
        throw error("transfer: insufficient balance (body must validate first)");
    fit->second -= value;
    tit->second += value;
    tx_.transfers.push_back(transfer{from, to, value});
}

}  // namespace perfcon
