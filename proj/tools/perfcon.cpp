// perfcon: command-line front-end for the performance-contract simulator.
// Every mutating subcommand maps 1:1 to a ledger transaction against the
// workspace state; status and report are read-only. Outputs are printed and
// also written as JSON/CSV files under the workspace for machine diffing.

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "perfcon/config_json.hpp"
#include "perfcon/scenario.hpp"
#include "perfcon/snapshot.hpp"

namespace fs = std::filesystem;
using namespace perfcon;

namespace {

struct workspace_lock {
    std::string path;

    explicit workspace_lock(const std::string& dir) : path(dir + "/.lock") {
        int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw error("workspace is locked by another invocation (" + path + ")");
        ::close(fd);
    }
    ~workspace_lock() { ::unlink(path.c_str()); }
    workspace_lock(const workspace_lock&) = delete;
    workspace_lock& operator=(const workspace_lock&) = delete;
};

struct workspace {
    std::string dir;
    std::unique_ptr<simulation> sim;
    std::map<std::string, std::string> aliases;  // name -> address hex

    std::string state_path() const { return dir + "/state.json"; }

    static workspace open(const std::string& dir, amount gas_price, const gas_schedule& schedule) {
        workspace w;
        w.dir = dir;
        fs::create_directories(dir);
        if (fs::exists(w.state_path())) {
            json j = load_json_file(w.state_path());
            w.sim = simulation_from_json(need(j, "sim", "state"));
            if (auto it = j.find("aliases"); it != j.end())
                for (auto a = it->begin(); a != it->end(); ++a)
                    w.aliases[a.key()] = a->get<std::string>();
        } else {
            w.sim = std::make_unique<simulation>(gas_price, schedule);
        }
        return w;
    }

    void save() const {
        json j;
        j["sim"] = simulation_to_json(*sim);
        json a = json::object();
        for (const auto& [name, hex] : aliases)
            a[name] = hex;
        j["aliases"] = a;
        write_json_file(state_path(), j);
    }

    address resolve(const std::string& who) const {
        auto it = aliases.find(who);
        if (it != aliases.end()) {
            auto a = address::from_hex(it->second);
            if (a)
                return *a;
        }
        auto a = address::from_hex(who);
        if (!a)
            throw error("unknown account '" + who + "' (no such alias, not a 64-hex address)");
        return *a;
    }
};

int report_receipt(const std::string& what, const receipt& r) {
    if (r.accepted) {
        std::cout << what << ": accepted seq=" << r.seq << " gas=" << r.gas_used
                  << " fee=" << amount_to_string(r.fee) << "\n";
        return 0;
    }
    std::cout << what << ": rejected(" << reject_reason_name(r.reason) << ") seq=" << r.seq
              << " fee=" << amount_to_string(r.fee) << "\n";
    return 2;
}

building_dataset load_data_path(const std::string& path, const std::string& building_id) {
    if (fs::is_directory(path)) {
        building_dataset all;
        all.building_id = building_id;
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path))
            if (e.path().extension() == ".csv")
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty())
            throw error("no .csv files in " + path);
        for (const fs::path& f : files) {
            building_dataset d = load_csv_file(f.string(), building_id);
            for (auto& [id, s] : d.series)
                if (!all.series.emplace(id, std::move(s)).second)
                    throw error("sensor " + id + " appears in more than one file");
        }
        return all;
    }
    return load_csv_file(path, building_id);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out)
        throw error("cannot open " + path + " for writing");
    out << text;
}

std::string default_state_dir() {
    if (const char* env = std::getenv("PERFCON_STATE"))
        return env;
    return "./perfcon-state";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"performance-based contract simulator"};
    app.require_subcommand(1);

    std::string state_dir = default_state_dir();
    int64_t gas_price_gigaunits = 20;
    std::string gas_schedule_file;
    app.add_option("--state", state_dir, "workspace directory (default $PERFCON_STATE or ./perfcon-state)");
    app.add_option("--gas-price-gigaunits", gas_price_gigaunits, "gas price for a fresh workspace");
    app.add_option("--gas-schedule", gas_schedule_file, "gas schedule JSON for a fresh workspace");

    // account
    auto* cmd_account = app.add_subcommand("account", "ledger accounts");
    std::string acc_alias, acc_balance = "0";
    auto* cmd_account_create = cmd_account->add_subcommand("create", "create an account (balances mint only before deployment)");
    cmd_account_create->add_option("--alias", acc_alias, "name for later --as use")->required();
    cmd_account_create->add_option("--balance", acc_balance, "initial balance in base units");
    auto* cmd_account_list = cmd_account->add_subcommand("list", "list known accounts");

    std::string as_who;
    auto add_as = [&](CLI::App* c) { c->add_option("--as", as_who, "sender account (alias or hex)")->required(); };

    // deploy
    auto* cmd_deploy = app.add_subcommand("deploy", "deploy the performance contract");
    add_as(cmd_deploy);

    // role add
    auto* cmd_role = app.add_subcommand("role", "role management");
    auto* cmd_role_add = cmd_role->add_subcommand("add", "grant a stakeholder role");
    std::string grantee, role_name_arg;
    add_as(cmd_role_add);
    cmd_role_add->add_option("--grantee", grantee, "account to grant to")->required();
    cmd_role_add->add_option("--role", role_name_arg, "building_owner | contractor | facility_manager")->required();

    // case create
    auto* cmd_case = app.add_subcommand("case", "contract cases");
    auto* cmd_case_create = cmd_case->add_subcommand("create", "register the building case");
    std::string case_file;
    add_as(cmd_case_create);
    cmd_case_create->add_option("--case", case_file, "case configuration JSON")->required();

    // fund
    auto* cmd_fund = app.add_subcommand("fund", "fund and lock the escrow");
    std::string fund_amount;
    add_as(cmd_fund);
    cmd_fund->add_option("--amount", fund_amount, "base units (default: exact worst-case cover)");

    // backend register
    auto* cmd_backend = app.add_subcommand("backend", "back-end oracle");
    auto* cmd_backend_register = cmd_backend->add_subcommand("register", "register the oracle address");
    std::string backend_who;
    add_as(cmd_backend_register);
    cmd_backend_register->add_option("--backend", backend_who, "oracle account")->required();

    // oracle run
    auto* cmd_oracle = app.add_subcommand("oracle", "back-end oracle runs");
    auto* cmd_oracle_run = cmd_oracle->add_subcommand("run", "plan a schedule and submit measurements");
    std::string oracle_case_file, oracle_data;
    uint64_t oracle_seed = 0;
    int64_t oracle_until = -1;
    add_as(cmd_oracle_run);
    cmd_oracle_run->add_option("--case", oracle_case_file, "case configuration JSON (sampling policy)")->required();
    cmd_oracle_run->add_option("--data", oracle_data, "sensor CSV file or directory of CSVs")->required();
    cmd_oracle_run->add_option("--seed", oracle_seed, "schedule and sensor-choice seed")->required();
    cmd_oracle_run->add_option("--until", oracle_until, "drop events after this time (seconds)");

    // clock
    auto* cmd_clock = app.add_subcommand("clock", "logical clock");
    auto* cmd_clock_set = cmd_clock->add_subcommand("set", "advance the logical clock (monotone)");
    int64_t clock_to = 0;
    cmd_clock_set->add_option("--to", clock_to, "seconds")->required();
    auto* cmd_clock_show = cmd_clock->add_subcommand("show", "print the logical clock");

    // status
    auto* cmd_status = app.add_subcommand("status", "contract status snapshot (read-only)");
    int64_t status_case = 1;
    cmd_status->add_option("--case", status_case, "case id");

    // redeem / release / deactivate
    auto* cmd_redeem = app.add_subcommand("redeem", "redeem accrued rewards");
    add_as(cmd_redeem);
    auto* cmd_release = app.add_subcommand("release", "release the remaining escrow");
    add_as(cmd_release);
    auto* cmd_deactivate = app.add_subcommand("deactivate", "deactivate the contract (settles funds)");
    add_as(cmd_deactivate);

    // report
    auto* cmd_report = app.add_subcommand("report", "gas and fiat cost report (read-only)");
    double report_gas_price = 20.0, report_fiat_rate = 0.0;
    cmd_report->add_option("--gas-price", report_gas_price, "gigaunits per gas")->required();
    cmd_report->add_option("--fiat-rate", report_fiat_rate, "currency units per coin")->required();

    // synth-gen
    auto* cmd_synth = app.add_subcommand("synth-gen", "generate a synthetic sensor CSV");
    std::string synth_spec_file, synth_out;
    uint64_t synth_seed = 0;
    cmd_synth->add_option("--spec", synth_spec_file, "synthetic spec JSON")->required();
    cmd_synth->add_option("--seed", synth_seed, "generator seed")->required();
    cmd_synth->add_option("--out", synth_out, "output CSV path")->required();

    // scenario run
    auto* cmd_scenario = app.add_subcommand("scenario", "scripted end-to-end runs");
    auto* cmd_scenario_run = cmd_scenario->add_subcommand("run", "execute a full scenario config");
    std::string scenario_file;
    cmd_scenario_run->add_option("--config", scenario_file, "scenario JSON")->required();

    // config print-defaults
    auto* cmd_config = app.add_subcommand("config", "configuration helpers");
    auto* cmd_config_defaults = cmd_config->add_subcommand("print-defaults", "print default bands, policy and schedule");

    CLI11_PARSE(app, argc, argv);

    try {
        // Commands that never touch a workspace.
        if (cmd_config_defaults->parsed()) {
            std::cout << defaults_to_json().dump(2) << "\n";
            return 0;
        }
        if (cmd_synth->parsed()) {
            synthetic_spec spec = synthetic_from_json(load_json_file(synth_spec_file));
            building_dataset d = generate_synthetic(spec, synth_seed);
            write_csv_file(synth_out, d);
            json sidecar;
            sidecar["seed"] = synth_seed;
            sidecar["spec"] = synthetic_to_json(spec);
            write_json_file(synth_out + ".spec.json", sidecar);
            std::cout << "wrote " << synth_out << " (" << d.series.size() << " sensors)\n";
            return 0;
        }

        gas_schedule schedule;
        if (!gas_schedule_file.empty())
            schedule = gas_schedule_from_json(load_json_file(gas_schedule_file));

        workspace_lock lock(([&] {
            fs::create_directories(state_dir);
            return state_dir;
        })());
        workspace ws = workspace::open(state_dir, static_cast<amount>(gas_price_gigaunits) * gigaunit, schedule);
        simulation& sim = *ws.sim;

        if (cmd_scenario_run->parsed()) {
            scenario_config cfg = scenario_from_json(load_json_file(scenario_file));
            scenario_run run = run_scenario(cfg);
            json summary = summary_to_json(run.summary);
            std::cout << summary.dump(2) << "\n";
            write_json_file(state_dir + "/scenario_summary.json", summary);
            write_json_file(state_dir + "/submission_report.json", submission_report_to_json(run.summary.oracle_report));
            write_json_file(state_dir + "/report.json", report_to_json(run.summary.costs));
            std::ostringstream txlog;
            run.sim->led().export_log(txlog);
            write_text_file(state_dir + "/txlog.csv", txlog.str());
            if (run.sim->contract()) {
                std::ostringstream results;
                write_results_csv(results, run.sim->contract()->results());
                write_text_file(state_dir + "/results.csv", results.str());
            }
            ws.sim = std::move(run.sim);
            ws.aliases.clear();
            for (const auto& [name, hex] : run.summary.actor_addresses)
                ws.aliases[name] = hex;
            ws.save();
            if (run.summary.completed)
                return 0;
            std::cerr << "scenario stopped at step '" << run.summary.failed_step << "'"
                      << (run.summary.deactivated ? " (deactivated)" : "")
                      << (run.summary.failure_reason.empty() ? "" : ": " + run.summary.failure_reason) << "\n";
            return 3;
        }

        if (cmd_account_create->parsed()) {
            if (ws.aliases.count(acc_alias))
                throw error("alias '" + acc_alias + "' already exists");
            address a = sim.led().create_account(parse_int128(acc_balance));
            ws.aliases[acc_alias] = a.hex();
            ws.save();
            std::cout << acc_alias << " " << a.hex() << "\n";
            return 0;
        }
        if (cmd_account_list->parsed()) {
            for (const auto& [name, hex] : ws.aliases) {
                auto a = address::from_hex(hex);
                std::cout << name << " " << hex << " balance="
                          << (a && sim.led().account_exists(*a) ? amount_to_string(sim.led().balance(*a)) : "?")
                          << "\n";
            }
            return 0;
        }

        if (cmd_clock_show->parsed()) {
            std::cout << sim.led().clock() << "\n";
            return 0;
        }
        if (cmd_clock_set->parsed()) {
            sim.led().set_clock(clock_to);
            ws.save();
            std::cout << "clock " << sim.led().clock() << "\n";
            return 0;
        }
        if (cmd_status->parsed()) {
            status_snapshot s = sim.status(status_case);
            json j = status_to_json(s);
            std::cout << j.dump(2) << "\n";
            write_json_file(state_dir + "/status.json", j);
            if (sim.contract()) {
                std::ostringstream results;
                write_results_csv(results, sim.contract()->results());
                write_text_file(state_dir + "/results.csv", results.str());
            }
            return 0;
        }
        if (cmd_report->parsed()) {
            cost_report r = build_cost_report(sim.led(), report_gas_price, report_fiat_rate);
            print_cost_report(std::cout, r);
            write_json_file(state_dir + "/report.json", report_to_json(r));
            std::ostringstream txlog;
            sim.led().export_log(txlog);
            write_text_file(state_dir + "/txlog.csv", txlog.str());
            return 0;
        }

        // Mutating commands: resolve sender, run, persist.
        int rc = 1;
        if (cmd_deploy->parsed()) {
            rc = report_receipt("deploy", sim.deploy(ws.resolve(as_who)));
        } else if (cmd_role_add->parsed()) {
            auto r = parse_role(role_name_arg);
            if (!r)
                throw error("unknown role '" + role_name_arg + "'");
            rc = report_receipt("role add", sim.add_role(ws.resolve(as_who), ws.resolve(grantee), *r));
        } else if (cmd_case_create->parsed()) {
            case_params params = case_from_json(load_json_file(case_file));
            int64_t id = 0;
            receipt r = sim.create_case(ws.resolve(as_who), params, &id);
            rc = report_receipt("case create", r);
            if (r.accepted)
                std::cout << "case_id " << id << "\n";
        } else if (cmd_fund->parsed()) {
            const performance_contract* pc = sim.contract();
            amount value = !fund_amount.empty() ? parse_int128(fund_amount)
                           : pc && pc->active_case() ? pc->active_case()->worst_case_escrow()
                                                     : 0;
            rc = report_receipt("fund " + amount_to_string(value), sim.fund_escrow(ws.resolve(as_who), value));
        } else if (cmd_backend_register->parsed()) {
            rc = report_receipt("backend register", sim.register_backend(ws.resolve(as_who), ws.resolve(backend_who)));
        } else if (cmd_oracle_run->parsed()) {
            const performance_contract* pc = sim.contract();
            if (!pc || !pc->active_case())
                throw error("oracle run: no case on the contract");
            const case_params& c = *pc->active_case();
            json case_json = load_json_file(oracle_case_file);
            sampling_policy pol;
            if (auto it = case_json.find("sampling"); it != case_json.end())
                pol = sampling_from_json(*it);
            pol.seed = oracle_seed;
            building_dataset data = load_data_path(oracle_data, c.building_id);
            schedule plan = plan_schedule(pol, c.start_time_s, c.duration_s);
            if (oracle_until >= 0)
                std::erase_if(plan.events, [&](const schedule_event& e) { return e.time > oracle_until; });
            submission_report rep = run_oracle(sim, ws.resolve(as_who), plan, data, oracle_seed);
            json j = submission_report_to_json(rep);
            std::cout << j.dump(2) << "\n";
            write_json_file(state_dir + "/submission_report.json", j);
            rc = rep.rejected == 0 ? 0 : 2;
        } else if (cmd_redeem->parsed()) {
            amount payout = 0;
            receipt r = sim.redeem(ws.resolve(as_who), &payout);
            rc = report_receipt("redeem", r);
            if (r.accepted)
                std::cout << "payout " << amount_to_string(payout) << "\n";
        } else if (cmd_release->parsed()) {
            amount refund = 0;
            receipt r = sim.release_escrow(ws.resolve(as_who), &refund);
            rc = report_receipt("release", r);
            if (r.accepted)
                std::cout << "refund " << amount_to_string(refund) << "\n";
        } else if (cmd_deactivate->parsed()) {
            rc = report_receipt("deactivate", sim.deactivate(ws.resolve(as_who)));
        }
        ws.save();
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
