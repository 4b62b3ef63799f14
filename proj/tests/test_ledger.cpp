#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "perfcon/ledger.hpp"

using namespace perfcon;

namespace {

std::optional<reject_reason> ok(tx_context&) { return std::nullopt; }

}  // namespace

TEST_CASE("account creation") {
    ledger led;
    address a = led.create_account(0);
    address b = led.create_account(coin);
    CHECK(led.balance(a) == 0);
    CHECK(led.balance(b) == coin);
    CHECK_FALSE(a == b);
    CHECK(a.hex().size() == 64);
    CHECK(led.genesis_supply() == coin);
}

TEST_CASE("setup phase closes at the first transaction") {
    ledger led;
    address a = led.create_account(10 * coin);
    CHECK(led.setup_open());
    led.apply(a, tx_kind::deploy, ok);
    CHECK_FALSE(led.setup_open());
    CHECK_THROWS_AS(led.create_account(1), error);  // no minting after setup
    CHECK_NOTHROW(led.create_account(0));
    CHECK(led.genesis_supply() == 10 * coin);
}

TEST_CASE("fee arithmetic: 21000 gas at 20 gigaunits") {
    gas_schedule sched;
    sched.of(tx_kind::add_role) = 21'000;
    ledger led(20 * gigaunit, sched);
    address a = led.create_account(coin);
    receipt r = led.apply(a, tx_kind::add_role, ok);
    CHECK(r.gas_used == 21'000);
    CHECK(r.fee == amount{420'000} * gigaunit);
    CHECK(led.balance(a) == coin - r.fee);
    CHECK(led.fee_sink() == r.fee);
}

TEST_CASE("rejected transactions pay the fee and change nothing else") {
    ledger led;
    address a = led.create_account(10 * coin);
    address b = led.create_account(10 * coin);
    amount before_b = led.balance(b);
    receipt r = led.apply(a, tx_kind::add_role, [](tx_context&) { return reject_reason::unauthorized; });
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == reject_reason::unauthorized);
    CHECK(led.balance(a) == 10 * coin - r.fee);
    CHECK(led.balance(b) == before_b);
    CHECK(led.log().size() == 1);
    CHECK_FALSE(led.log().back().accepted);
    CHECK(led.log().back().transfers.empty());
}

TEST_CASE("unknown sender and fee-insolvent sender are errors, not log entries") {
    ledger led;
    address a = led.create_account(1);  // cannot cover any fee
    address ghost;
    ghost.bytes[5] = 9;
    CHECK_THROWS_AS(led.apply(ghost, tx_kind::add_role, ok), error);
    CHECK_THROWS_AS(led.apply(a, tx_kind::add_role, ok), error);
    CHECK(led.log().empty());
    CHECK(led.balance(a) == 1);
}

TEST_CASE("value transfers move balances inside accepted transactions") {
    ledger led;
    address a = led.create_account(10 * coin);
    address b = led.create_account(0);
    receipt r = led.apply(a, tx_kind::fund_escrow, [&](tx_context& ctx) -> std::optional<reject_reason> {
        ctx.transfer_value(a, b, 3 * coin);
        return std::nullopt;
    });
    CHECK(r.accepted);
    CHECK(led.balance(b) == 3 * coin);
    CHECK(led.balance(a) == 10 * coin - 3 * coin - r.fee);
    CHECK(led.log().back().transfers.size() == 1);
}

TEST_CASE("conservation across a random batch") {
    ledger led;
    rng g(5);
    std::vector<address> accounts;
    for (int i = 0; i < 6; ++i)
        accounts.push_back(led.create_account(coin * static_cast<amount>(1 + g.below(50))));
    amount supply = led.genesis_supply();
    for (int i = 0; i < 300; ++i) {
        address from = accounts[g.below(accounts.size())];
        address to = accounts[g.below(accounts.size())];
        tx_kind k = all_tx_kinds[g.below(all_tx_kinds.size())];
        bool reject = g.below(4) == 0;
        led.set_clock(led.clock() + static_cast<int64_t>(g.below(1000)));
        led.apply(from, k, [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (reject)
                return reject_reason::wrong_state;
            amount v = static_cast<amount>(g.below(1000)) * gigaunit;
            if (ctx.balance(from) >= v)
                ctx.transfer_value(from, to, v);
            return std::nullopt;
        });
        REQUIRE(led.circulating() == supply);
    }
}

TEST_CASE("log sequence and timestamps") {
    ledger led;
    address a = led.create_account(100 * coin);
    led.apply(a, tx_kind::deploy, ok);
    led.set_clock(50);
    led.apply(a, tx_kind::add_role, ok);
    led.set_clock(50);  // equal clock allowed
    led.apply(a, tx_kind::add_role, ok);
    CHECK_THROWS_AS(led.set_clock(49), error);
    const auto& log = led.log();
    for (size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].seq == i);
        if (i > 0)
            CHECK(log[i].timestamp >= log[i - 1].timestamp);
    }
}

TEST_CASE("gas totals") {
    ledger led;
    CHECK(led.gas_totals().total == 0);
    for (tx_kind k : all_tx_kinds)
        CHECK(led.gas_totals().of(k) == 0);

    address a = led.create_account(100 * coin);
    led.apply(a, tx_kind::deploy, ok);  // default schedule pins deployment
    CHECK(led.gas_totals().total == 4'249'797);

    rng g(9);
    for (int i = 0; i < 100; ++i) {
        tx_kind k = all_tx_kinds[g.below(all_tx_kinds.size())];
        bool reject = g.below(3) == 0;
        led.apply(a, k, [&](tx_context&) -> std::optional<reject_reason> {
            if (reject)
                return reject_reason::wrong_state;  // rejected gas still counts
            return std::nullopt;
        });
    }
    gas_totals_result t = led.gas_totals();
    int64_t sum = 0;
    for (tx_kind k : all_tx_kinds)
        sum += t.of(k);
    CHECK(sum == t.total);
}

TEST_CASE("replaying the log reproduces the digest bit for bit") {
    ledger led;
    rng g(31);
    std::vector<address> accounts;
    for (int i = 0; i < 4; ++i)
        accounts.push_back(led.create_account(coin * static_cast<amount>(5 + g.below(20))));
    for (int i = 0; i < 120; ++i) {
        address from = accounts[g.below(accounts.size())];
        address to = accounts[g.below(accounts.size())];
        led.set_clock(led.clock() + static_cast<int64_t>(g.below(500)));
        bool reject = g.below(5) == 0;
        led.apply(from, all_tx_kinds[g.below(all_tx_kinds.size())],
                  [&](tx_context& ctx) -> std::optional<reject_reason> {
                      if (reject)
                          return reject_reason::unauthorized;
                      amount v = static_cast<amount>(g.below(100)) * gigaunit;
                      if (ctx.balance(from) >= v)
                          ctx.transfer_value(from, to, v);
                      return std::nullopt;
                  });
    }
    ledger fresh = ledger::replay(led.genesis(), led.log(), led.gas_price(), led.schedule());
    CHECK(fresh.digest() == led.digest());
    CHECK(fresh.circulating() == led.circulating());
}

TEST_CASE("log export format") {
    gas_schedule sched;
    sched.of(tx_kind::deploy) = 21'000;
    ledger led(20 * gigaunit, sched);
    address a = led.create_account(coin);
    led.apply(a, tx_kind::deploy, ok);
    led.set_clock(7);
    led.apply(a, tx_kind::add_role, [](tx_context&) { return reject_reason::unauthorized; });
    std::ostringstream os;
    led.export_log(os);
    std::string expect0 = "0,Deploy," + a.hex() + ",21000,420000000000000,accepted,0\n";
    std::string expect1 = "1,AddRole," + a.hex() + ",150000,3000000000000000,rejected(unauthorized),7\n";
    CHECK(os.str() == expect0 + expect1);
}

TEST_CASE("observer sees every logged transaction") {
    ledger led;
    address a = led.create_account(coin * 10);
    int seen = 0;
    led.set_observer([&](const transaction& tx) {
        ++seen;
        CHECK(tx.seq == static_cast<uint64_t>(seen - 1));
    });
    led.apply(a, tx_kind::deploy, ok);
    led.apply(a, tx_kind::add_role, [](tx_context&) { return reject_reason::wrong_state; });
    CHECK(seen == 2);
}

TEST_CASE("amount parsing and rendering") {
    CHECK(amount_to_string(0) == "0");
    CHECK(amount_to_string(coin) == "1000000000000000000");
    CHECK(amount_to_string(-42) == "-42");
    CHECK(parse_int128("1000000000000000000") == coin);
    CHECK(parse_int128("-7") == -7);
    // beyond 64-bit range
    amount big = parse_int128("41327504200800000000");
    CHECK(amount_to_string(big) == "41327504200800000000");
    CHECK_THROWS_AS(parse_int128("12x"), error);
    CHECK_THROWS_AS(parse_int128(""), error);
}
