#include <catch2/catch_amalgamated.hpp>

#include "batch_oracle.hpp"
#include "perfcon/config_json.hpp"
#include "perfcon/snapshot.hpp"
#include "support.hpp"

using namespace perfcon;

TEST_CASE("replication scenario completes end to end") {
    auto run = run_scenario(testsup::replication_config(42),
                            [](const simulation& s) { s.check_conservation(); });
    const scenario_summary& s = run.summary;
    REQUIRE(s.completed);
    CHECK(s.final_state == lifecycle_state::completed);
    CHECK(s.payout_events == 1);
    CHECK(std::llabs(s.measurement_count - 1241) <= 124);
    CHECK(s.submit_gas_share >= 0.96);
    CHECK(s.submit_gas_share <= 0.98);
    CHECK(s.refund > 0);
    CHECK(s.payout_fm > 0);
    // the paper's workflow leaves zero stranded funds
    CHECK(run.sim->led().balance(run.sim->contract_address()) == 0);
}

TEST_CASE("identical seed and config reproduce everything byte for byte") {
    auto a = run_scenario(testsup::replication_config(42));
    auto b = run_scenario(testsup::replication_config(42));
    CHECK(a.summary.state_digest == b.summary.state_digest);
    CHECK(submission_report_to_json(a.summary.oracle_report).dump() ==
          submission_report_to_json(b.summary.oracle_report).dump());
    CHECK(report_to_json(a.summary.costs).dump() == report_to_json(b.summary.costs).dump());
    CHECK(summary_to_json(a.summary).dump() == summary_to_json(b.summary).dump());

    auto c = run_scenario(testsup::replication_config(43));
    CHECK(c.summary.state_digest != a.summary.state_digest);
    CHECK_FALSE(c.plan == a.plan);  // a different seed means a different schedule
}

TEST_CASE("scenario config survives the JSON round trip") {
    scenario_config cfg = testsup::replication_config(42);
    json j = scenario_to_json(cfg);
    scenario_config back = scenario_from_json(j);
    auto a = run_scenario(cfg);
    auto b = run_scenario(back);
    CHECK(a.summary.state_digest == b.summary.state_digest);
    CHECK(scenario_to_json(back).dump() == j.dump());
}

TEST_CASE("a missing funding step aborts at backend registration") {
    scenario_config cfg = testsup::replication_config(42);
    cfg.skip_funding = true;
    auto run = run_scenario(cfg);
    CHECK_FALSE(run.summary.completed);
    CHECK(run.summary.failed_step == "backend_register");
    CHECK(run.summary.failure_reason == "wrong_state");
}

TEST_CASE("underfunded escrow aborts at the funding step with the reason") {
    scenario_config cfg = testsup::replication_config(42);
    cfg.fund_amount = cfg.case_cfg.worst_case_escrow() - 1;
    auto run = run_scenario(cfg);
    CHECK_FALSE(run.summary.completed);
    CHECK(run.summary.failed_step == "fund");
    CHECK(run.summary.failure_reason == "insufficient_escrow");
}

TEST_CASE("mid-run deactivation settles and halts, conservation intact") {
    scenario_config cfg = testsup::replication_config(42);
    cfg.deactivate_at_s = 86'400 + 777;
    int checks = 0;
    auto run = run_scenario(cfg, [&](const simulation& s) {
        s.check_conservation();
        ++checks;
    });
    CHECK(run.summary.deactivated);
    CHECK_FALSE(run.summary.completed);
    CHECK(run.summary.final_state == lifecycle_state::deactivated);
    CHECK(run.summary.oracle_report.rejected > 0);  // post-deactivation submissions bounce
    CHECK(checks > 500);
    CHECK(run.sim->led().balance(run.sim->contract_address()) == 0);
}

TEST_CASE("randomized scenarios conserve after every transaction") {
    rng g(2024);
    int deactivated = 0;
    for (int i = 0; i < 12; ++i) {
        scenario_config cfg = testsup::random_scenario(g, true);
        auto run = run_scenario(cfg, [](const simulation& s) { s.check_conservation(); });
        if (run.summary.deactivated)
            ++deactivated;
        else
            REQUIRE(run.summary.completed);
        run.sim->check_conservation();
    }
    CHECK(deactivated > 0);
}

TEST_CASE("streaming evaluation equals the batch recompute on random one-day runs") {
    rng g(5150);
    for (int i = 0; i < 6; ++i) {
        scenario_config cfg = testsup::random_scenario(g, false, 86'400);
        auto run = run_scenario(cfg);
        REQUIRE(run.summary.completed);
        const auto& streaming = run.sim->contract()->results();
        auto batch = testsup::recompute_results(cfg.case_cfg, run.sim->contract()->measurements());
        REQUIRE(streaming.size() == batch.size());
        for (size_t k = 0; k < batch.size(); ++k) {
            CAPTURE(i, k);
            REQUIRE(results_equal(streaming[k], batch[k]));
        }
    }
}

TEST_CASE("snapshots round-trip mid-run and stay bit-identical") {
    scenario_config cfg = testsup::replication_config(7);
    auto run = run_scenario(cfg);
    REQUIRE(run.summary.completed);

    json snap = simulation_to_json(*run.sim);
    auto restored = simulation_from_json(snap);
    CHECK(restored->state_digest() == run.sim->state_digest());
    CHECK(simulation_to_json(*restored).dump() == snap.dump());

    // both copies keep evolving identically
    address fm = *run.sim->contract()->holder(role::facility_manager);
    run.sim->led().set_clock(run.sim->led().clock() + cfg.case_cfg.redemption_interval_s);
    restored->led().set_clock(restored->led().clock() + cfg.case_cfg.redemption_interval_s);
    amount p1 = -1, p2 = -2;
    REQUIRE(run.sim->redeem(fm, &p1).accepted);
    REQUIRE(restored->redeem(fm, &p2).accepted);
    CHECK(p1 == p2);
    CHECK(p1 == 0);  // everything was settled at release
    CHECK(restored->state_digest() == run.sim->state_digest());
}

TEST_CASE("defaults document pins the calibrated schedule and bands") {
    json d = defaults_to_json();
    CHECK(d["gas_schedule"]["Deploy"] == 4'249'797);
    CHECK(d["gas_schedule"]["SubmitMeasurement"] == 360'000);
    CHECK(d["bands"]["temperature"]["full_lo"] == 0.9);
    CHECK(d["bands"]["humidity"]["reduced_hi"] == 1.8);
    CHECK(d["bands"]["co2"]["full_hi"] == 1.0);
    CHECK(d["contractor_policy"]["table"][0][1] == "full");
    CHECK(d["sampling"]["temperature_s"] == 17'280);
    CHECK(d["sampling"]["energy_s"] == 604'800);
    CHECK(d["reduced_fraction"]["num"] == 1);
    CHECK(d["reduced_fraction"]["den"] == 2);
}

TEST_CASE("actor funding failures surface as ledger errors at the failing step") {
    scenario_config cfg = testsup::replication_config(42);
    cfg.actors["backend"] = coin / 1000;  // cannot pay a day of submission fees
    auto run = run_scenario(cfg);
    CHECK_FALSE(run.summary.completed);
    CHECK(run.summary.failed_step == "oracle_run");
}
