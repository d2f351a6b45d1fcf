// fleet-observer: distributed HDV tracking and sensor fault detection over
// a CAV network. Subcommands operate on scenario JSON files; see README.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fleetobs/io.hpp"
#include "fleetobs/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCertification = 3;

struct CommonOpts {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format = "csv";
};

fleetobs::Scenario load_or_exit(const CommonOpts& opts) {
    auto res = fleetobs::load_scenario_file(opts.scenario_path);
    if (!res.ok()) {
        std::cerr << "scenario validation failed:\n";
        for (const auto& e : res.errors)
            std::cerr << "  " << e.path << ": " << e.message << "\n";
        std::exit(kExitValidation);
    }
    fleetobs::Scenario s = *res.scenario;
    if (opts.seed) s.seed = *opts.seed;
    return s;
}

fleetobs::OutputFormat parse_format(const std::string& f) {
    return f == "json" ? fleetobs::OutputFormat::json
                       : fleetobs::OutputFormat::csv;
}

std::filesystem::path out_dir_for(const CommonOpts& opts,
                                  const fleetobs::Scenario& s,
                                  const std::string& suffix) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    return std::filesystem::path("runs") / (s.name + suffix);
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const fleetobs::ValidationFailure& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const fleetobs::CertificationFailure& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return kExitCertification;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_scenario = true) {
    if (needs_scenario)
        cmd->add_option("scenario", opts.scenario_path, "scenario JSON file")
            ->required()
            ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the scenario seed");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--format", opts.format, "metrics format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fleet-observer: single time-scale distributed observer and local "
        "fault detection for mixed CAV/HDV traffic"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* simulate = app.add_subcommand("simulate", "run one seeded scenario");
    add_common(simulate, opts);
    simulate->callback([&]() {
        std::exit(guarded([&]() {
            const auto s = load_or_exit(opts);
            const auto rr = fleetobs::run_scenario(s);
            const auto dir = out_dir_for(opts, s, "");
            fleetobs::write_run_result(dir, rr, parse_format(opts.format));
            std::cout << "wrote " << dir.string() << "\n"
                      << "rho=" << rr.certs.rho << " beta=" << rr.certs.beta
                      << " mse_avg=" << rr.metrics.mse_avg
                      << " defect=" << rr.metrics.error_dynamics_defect << "\n";
            return kExitOk;
        }));
    });

    auto* gain = app.add_subcommand("gain-synth",
                                    "synthesize and certify the observer gain");
    add_common(gain, opts);
    gain->callback([&]() {
        std::exit(guarded([&]() {
            const auto s = load_or_exit(opts);
            const auto run = fleetobs::prepare_run(s);
            std::cout << "rho=" << run.certs.rho << " beta=" << run.certs.beta
                      << " isolation_ratio=" << run.certs.ratio
                      << " epsilon=" << run.certs.epsilon;
            if (run.certs.theta) std::cout << " theta=" << *run.certs.theta;
            std::cout << "\n";
            const auto dir = out_dir_for(opts, s, "");
            std::filesystem::create_directories(dir);
            std::ofstream out(dir / "gain.json", std::ios::binary);
            out << run.gain.to_json() << "\n";
            std::cout << "wrote " << (dir / "gain.json").string() << "\n";
            return kExitOk;
        }));
    });

    auto* check = app.add_subcommand("check-observability",
                                     "rank test of the (W (x) A, D_C) pair");
    add_common(check, opts);
    check->callback([&]() {
        std::exit(guarded([&]() {
            const auto s = load_or_exit(opts);
            // Build network and model without gain synthesis.
            auto errs = fleetobs::validate_scenario(s);
            if (!errs.empty()) throw fleetobs::ValidationFailure(errs);
            fleetobs::CavNetwork net;
            if (s.network.kind == fleetobs::NetworkSpec::Kind::explicit_adjacency) {
                net = fleetobs::make_network(s.network.adjacency, s.consensus_rule);
            } else {
                auto rng = fleetobs::RngStream::child(s.seed, 1);
                net = fleetobs::erdos_renyi(s.cav_count(), s.network.edge_prob,
                                            rng, s.network.require_strongly_connected,
                                            s.consensus_rule, s.network.max_attempts);
            }
            const auto model = fleetobs::build_assumed_model(
                s.model_kind, s.sampling_dt_s, s.hdv_count(), s.model_noise_var);
            std::vector<fleetobs::Matrix> c_rows;
            for (const auto& spec : s.sensors)
                c_rows.push_back(
                    fleetobs::selector_rows(spec, s.model_kind, s.hdv_count()));
            const auto so =
                fleetobs::build_shared_observation(c_rows, net.in_neighbors);
            const auto obs = fleetobs::check_distributed_observability(
                net.w, model.a, so.d_blocks);
            std::cout << "observable=" << (obs.observable ? "true" : "false")
                      << " rank=" << obs.rank << " dim=" << obs.dim << "\n";
            return obs.observable ? kExitOk : kExitCertification;
        }));
    });

    int trials = 20;
    auto* mc = app.add_subcommand("montecarlo",
                                  "seeded Monte Carlo campaign with CIs");
    add_common(mc, opts);
    mc->add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
    mc->callback([&]() {
        std::exit(guarded([&]() {
            const auto s = load_or_exit(opts);
            const auto res = fleetobs::monte_carlo(s, trials);
            const auto dir = out_dir_for(opts, s, "_mc");
            fleetobs::write_monte_carlo(dir, res, parse_format(opts.format));
            std::cout << "wrote " << dir.string() << "\n"
                      << "mse mean=" << res.mse.mean
                      << " +-" << res.mse.half_ci95 << "\n";
            return kExitOk;
        }));
    });

    std::string l_list = "7,10,15";
    auto* cmp = app.add_subcommand(
        "compare-baseline",
        "proposed observer vs multi time-scale inner-loop baseline");
    add_common(cmp, opts);
    cmp->add_option("--L", l_list, "comma-separated inner-loop counts");
    cmp->callback([&]() {
        std::exit(guarded([&]() {
            const auto s = load_or_exit(opts);
            std::vector<int> ls;
            std::stringstream ss(l_list);
            std::string tok;
            while (std::getline(ss, tok, ',')) ls.push_back(std::stoi(tok));
            const auto res = fleetobs::compare_baseline(s, ls);
            const auto dir = out_dir_for(opts, s, "_baseline");
            fleetobs::write_comparison(dir, res, s.sampling_dt_s);
            std::cout << "wrote " << dir.string() << "\n";
            for (const auto& b : res.baselines)
                std::cout << "L=" << b.inner_loops
                          << " message_ratio=" << b.message_ratio << "\n";
            return kExitOk;
        }));
    });

    std::string result_dir;
    auto* plots = app.add_subcommand("emit-plots",
                                     "figure-ready CSVs + manifest from a result dir");
    plots->add_option("result_dir", result_dir, "directory written by simulate")
        ->required()
        ->check(CLI::ExistingDirectory);
    plots->callback([&]() {
        std::exit(guarded([&]() {
            fleetobs::emit_plots(result_dir);
            std::cout << "wrote " << (std::filesystem::path(result_dir) / "plots").string()
                      << "\n";
            return kExitOk;
        }));
    });

    CLI11_PARSE(app, argc, argv);
    return kExitOk;
}
