#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "dss/config.hpp"
#include "dss/errors.hpp"
#include "dss/ledger.hpp"
#include "dss/node.hpp"
#include "dss/registry.hpp"
#include "dss/sim.hpp"
#include "dss/sweep.hpp"

namespace {

// The solved sleep interval may legitimately be zero, so the report reads
// through the unchecked evaluators.
void print_lifetime_report(const dss::node::DutyCycleConfig& duty,
                           const dss::node::BatteryState& battery) {
    const double cycle_mah = dss::node::detail::cycle_charge_mah_at(duty.sleep_hours, duty);
    fmt::print("# dss-lifetime v1\n");
    fmt::print("charge_model={}\n",
               duty.charge_model == dss::node::ChargeModel::rounded ? "rounded" : "measured");
    fmt::print("sleep_hours={}\n", duty.sleep_hours);
    fmt::print("init_mah={}\n", duty.init_charge_mah());
    fmt::print("com_mah={}\n", duty.com_charge_mah());
    fmt::print("sleep_mah={}\n", duty.sleep_current_ma * duty.sleep_hours);
    fmt::print("cycle_mah={}\n", cycle_mah);
    fmt::print("cycle_length_h={}\n",
               duty.init_phase_h() + duty.com_phase_h() + duty.sleep_hours);
    fmt::print("cycles={}\n", battery.capacity_mah / cycle_mah);
    fmt::print("lifetime_h={}\n",
               dss::node::detail::lifetime_hours_at(duty.sleep_hours, duty, battery));
    if (duty.sleep_current_ma > 0.0)
        fmt::print("asymptote_h={}\n", battery.capacity_mah / duty.sleep_current_ma);
    fmt::print("# end\n");
}

int run_lifetime(const std::string& config_path, const std::string& charge_model,
                 double sleep_hours, double target_hours, bool have_sleep) {
    dss::node::DutyCycleConfig duty;
    dss::node::BatteryState battery;
    if (!config_path.empty()) {
        const dss::sim::SimConfig config = dss::config::load_sim_config_file(config_path);
        duty = config.duty_cycle;
        battery = config.battery;
        battery.capacity_mah *= config.cold_capacity_factor;
    }
    if (charge_model == "rounded")
        duty.charge_model = dss::node::ChargeModel::rounded;
    else if (charge_model == "measured")
        duty.charge_model = dss::node::ChargeModel::measured;
    if (have_sleep) {
        duty.sleep_hours = sleep_hours;
        duty.validate();
        battery.validate();
    } else {
        duty.sleep_hours = dss::node::min_sleep_for(target_hours, duty, battery);
        fmt::print("# target {} h needs sleep_hours >= {}\n", target_hours, duty.sleep_hours);
    }
    print_lifetime_report(duty, battery);
    return 0;
}

void write_or_die(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dss::ParseError(0, fmt::format("cannot open '{}' for writing", path));
    out << content;
    out.flush();
    if (!out) throw dss::ParseError(0, fmt::format("failed writing '{}'", path));
}

int run_simulate(const std::string& config_path, std::vector<std::uint64_t> seeds,
                 const std::string& out_prefix, bool serial) {
    dss::sim::SimConfig config = dss::config::load_sim_config_file(config_path);
    config.validate();
    if (seeds.empty()) seeds.push_back(config.seed);
    const std::vector<dss::sim::SweepResult> results =
        serial ? dss::sim::run_sweep_serial(config, seeds)
               : dss::sim::run_sweep(config, seeds);
    for (const auto& r : results) {
        const std::string summary = r.run.summary.render();
        if (out_prefix.empty()) {
            fmt::print("{}", r.run.trace);
            fmt::print("{}", summary);
            continue;
        }
        const std::string stem = results.size() == 1
                                     ? out_prefix
                                     : fmt::format("{}-seed{}", out_prefix, r.seed);
        write_or_die(stem + ".trace", r.run.trace);
        write_or_die(stem + ".summary", summary);
        fmt::print("wrote {}.trace and {}.summary\n", stem, stem);
    }
    return 0;
}

int run_redundancy(const std::string& csv_path, std::size_t k) {
    std::ifstream in(csv_path);
    if (!in) throw dss::ParseError(0, fmt::format("cannot open '{}'", csv_path));
    const dss::registry::IngestResult ingested = dss::registry::ingest(in);
    for (const auto& issue : ingested.issues)
        fmt::print(stderr, "warning: line {}: {}\n", issue.line_no, issue.message);
    fmt::print("# dss-redundancy v1\n");
    for (const auto& s : dss::registry::summarize_species(ingested.records))
        fmt::print("species,{},{},{},{}\n", dss::registry::csv_quote(s.species),
                   s.depositors, s.accessions, s.countries);
    const auto histogram = dss::registry::depositor_histogram(ingested.records);
    for (const auto& [depositors, species] : histogram.buckets)
        fmt::print("histogram,{},{}\n", depositors, species);
    for (const auto& s : dss::registry::at_risk(ingested.records, k))
        fmt::print("at_risk,{},{}\n", dss::registry::csv_quote(s.species), s.depositors);
    fmt::print("# end\n");
    return 0;
}

int run_lottery_demo(std::uint64_t seed) {
    dss::ledger::Lottery lottery;
    const dss::ledger::ValidityPolicy policy;
    lottery.fund("sponsor", 1000, 0);
    lottery.enter("node1", 22, 15, policy, 1);  // -18 C, ideal
    lottery.enter("node2", 30, 16, policy, 2);  // -10 C, too warm
    lottery.enter("node3", 25, 12, policy, 3);  // -15 C, band edge
    lottery.enter("node4", 60, 15, policy, 4);  // +20 C, no freezer at all
    lottery.enter("node5", 19, 18, policy, 5);  // -21 C, band edge
    lottery.draw(seed, 6);
    fmt::print("{}", lottery.log_text());
    return 0;
}

int run_lottery_replay(const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) throw dss::ParseError(0, fmt::format("cannot open '{}'", log_path));
    const dss::ledger::Lottery lottery = dss::ledger::replay(in);
    fmt::print("replay ok: {} operations, {} rounds, pot={}, paid={}\n",
               lottery.log().size(), lottery.round(), lottery.pot(),
               lottery.total_paid());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic seed-storage network simulator and analysis tools"};
    app.require_subcommand(1);
    app.footer("Config keys (JSON), with defaults:\n" + dss::config::render_key_table());

    auto* lifetime = app.add_subcommand(
        "lifetime", "Battery lifetime for a duty cycle, or the sleep interval a target needs");
    std::string lt_config;
    std::string lt_model;
    double lt_sleep = 0.0;
    double lt_target = 0.0;
    lifetime->add_option("--config", lt_config, "JSON config supplying duty cycle and battery");
    lifetime->add_option("--charge-model", lt_model, "rounded or measured")
        ->check(CLI::IsMember({"rounded", "measured"}));
    auto* lt_sleep_opt =
        lifetime->add_option("--sleep-hours", lt_sleep, "deep-sleep interval between cycles")
            ->check(CLI::PositiveNumber);
    auto* lt_target_opt = lifetime
                              ->add_option("--target-hours", lt_target,
                                           "solve for the sleep interval reaching this")
                              ->check(CLI::PositiveNumber);
    lt_sleep_opt->excludes(lt_target_opt);

    auto* simulate = app.add_subcommand("simulate", "Run the network simulation");
    std::string sim_config;
    std::vector<std::uint64_t> sim_seeds;
    std::string sim_out;
    bool sim_serial = false;
    simulate->add_option("config", sim_config, "JSON run description")->required();
    simulate->add_option("--seed", sim_seeds,
                         "override the config seed; repeat for a parameter sweep");
    simulate->add_option("--out", sim_out,
                         "file prefix for .trace and .summary outputs (default: stdout)");
    simulate->add_flag("--serial", sim_serial, "run sweeps on one thread");

    auto* redundancy = app.add_subcommand(
        "redundancy", "Depositor redundancy report from a holdings CSV");
    std::string red_csv;
    std::size_t red_k = 2;
    redundancy->add_option("csv", red_csv, "holdings CSV (species,depositor,accessions,country)")
        ->required();
    redundancy->add_option("--k", red_k, "flag species with fewer distinct depositors than this");

    auto* lottery = app.add_subcommand("lottery", "Emit a demo ledger log, or verify one");
    std::string lot_path;
    std::uint64_t lot_seed = 1;
    bool lot_demo = false;
    lottery->add_flag("--demo", lot_demo, "print a small self-contained ledger log");
    lottery->add_option("--seed", lot_seed, "draw seed for --demo");
    lottery->add_option("log", lot_path, "ledger log to re-execute and verify");

    try {
        app.parse(argc, argv);
        if (lifetime->parsed()) {
            if (static_cast<int>(lt_sleep_opt->count() > 0) +
                    static_cast<int>(lt_target_opt->count() > 0) !=
                1) {
                fmt::print(stderr, "error: pass exactly one of --sleep-hours or --target-hours\n");
                return 1;
            }
            return run_lifetime(lt_config, lt_model, lt_sleep, lt_target,
                                lt_sleep_opt->count() > 0);
        }
        if (simulate->parsed())
            return run_simulate(sim_config, sim_seeds, sim_out, sim_serial);
        if (redundancy->parsed()) return run_redundancy(red_csv, red_k);
        if (lottery->parsed()) {
            if (lot_demo == !lot_path.empty()) {
                fmt::print(stderr, "error: pass either --demo or a log file, not both\n");
                return 1;
            }
            return lot_demo ? run_lottery_demo(lot_seed) : run_lottery_replay(lot_path);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const dss::ParseError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
}
