#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "perfcon/config_json.hpp"
#include "perfcon/costs.hpp"
#include "perfcon/scenario.hpp"
#include "support.hpp"

using namespace perfcon;

TEST_CASE("published cost arithmetic: 460'217'196 gas at 89.8 gigaunits and 322.5 per coin") {
    gas_schedule sched;
    sched.of(tx_kind::deploy) = 460'217'196;  // one transaction carrying the full measured total
    ledger led(20 * gigaunit, sched);
    address a = led.create_account(3'000 * coin);
    led.apply(a, tx_kind::deploy, [](tx_context&) -> std::optional<reject_reason> { return std::nullopt; });

    cost_report r = build_cost_report(led, 89.8, 322.5);
    CHECK(r.total_gas == 460'217'196);
    CHECK(std::fabs(r.coin_cost - 41.33) <= 0.01);
    CHECK(std::fabs(r.fiat_cost - 13'327.0) <= 5.0);
}

TEST_CASE("empty ledger yields an all-zero report") {
    ledger led;
    cost_report r = build_cost_report(led, 89.8, 322.5);
    CHECK(r.total_gas == 0);
    CHECK(r.coin_cost == 0.0);
    CHECK(r.fiat_cost == 0.0);
    for (tx_kind k : all_tx_kinds) {
        CHECK(r.gas_of(k) == 0);
        CHECK(r.share_of(k) == 0.0);
    }
}

TEST_CASE("per-kind gas partitions the total and shares sum to one") {
    ledger led;
    address a = led.create_account(1'000 * coin);
    rng g(17);
    for (int i = 0; i < 200; ++i) {
        bool reject = g.below(4) == 0;
        led.apply(a, all_tx_kinds[g.below(all_tx_kinds.size())], [&](tx_context&) -> std::optional<reject_reason> {
            if (reject)
                return reject_reason::wrong_state;
            return std::nullopt;
        });
    }
    cost_report r = build_cost_report(led, 50.0, 100.0);
    int64_t sum = 0;
    double share_sum = 0.0;
    for (tx_kind k : all_tx_kinds) {
        sum += r.gas_of(k);
        share_sum += r.share_of(k);
    }
    CHECK(sum == r.total_gas);
    CHECK(std::fabs(share_sum - 1.0) <= 1e-9);
    // recomputable from its own fields
    CHECK(r.coin_cost == static_cast<double>(r.total_gas) * r.gas_price_gigaunits * 1e-9);
    CHECK(r.fiat_cost == r.coin_cost * r.fiat_rate);
}

TEST_CASE("the report is invariant under log replay") {
    ledger led;
    address a = led.create_account(1'000 * coin);
    address b = led.create_account(0);
    rng g(23);
    for (int i = 0; i < 100; ++i) {
        led.set_clock(led.clock() + 10);
        led.apply(a, all_tx_kinds[g.below(all_tx_kinds.size())], [&](tx_context& ctx) -> std::optional<reject_reason> {
            if (g.below(5) == 0)
                return reject_reason::unauthorized;
            ctx.transfer_value(a, b, gigaunit);
            return std::nullopt;
        });
    }
    ledger replayed = ledger::replay(led.genesis(), led.log(), led.gas_price(), led.schedule());
    json r1 = report_to_json(build_cost_report(led, 89.8, 322.5));
    json r2 = report_to_json(build_cost_report(replayed, 89.8, 322.5));
    CHECK(r1.dump() == r2.dump());
}

TEST_CASE("replicated scenario keeps the submission share at the measured level") {
    auto run = run_scenario(testsup::replication_config(42));
    REQUIRE(run.summary.completed);
    cost_report r = run.summary.costs;
    double share = r.share_of(tx_kind::submit_measurement);
    CHECK(share >= 0.96);
    CHECK(share <= 0.98);
}

TEST_CASE("text rendering is stream-state independent") {
    ledger led;
    address a = led.create_account(100 * coin);
    led.apply(a, tx_kind::deploy, [](tx_context&) -> std::optional<reject_reason> { return std::nullopt; });
    cost_report r = build_cost_report(led, 89.8, 322.5);
    std::ostringstream plain, hexed;
    print_cost_report(plain, r);
    hexed << std::hex;
    print_cost_report(hexed, r);
    CHECK(plain.str() == hexed.str());
    CHECK(plain.str().find("total gas        4249797") != std::string::npos);
}
