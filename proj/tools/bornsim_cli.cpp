#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bornsim/errors.hpp"
#include "bornsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitConvergence = 4;

struct FlagSpec {
    const char* key;
    const char* names;
    const char* help;
};

const FlagSpec kFlags[] = {
    {"scenario", "--scenario", "fig1 | fig2 | fig3a | fig3b | finite_t | custom"},
    {"omega0", "--omega0", "photon frequency"},
    {"E_e", "--E_e,--ee", "excited dot energy"},
    {"E_g", "--E_g,--eg", "ground dot energy"},
    {"lambda", "--lambda", "dot-photon coupling"},
    {"kappa", "--kappa", "photon loss rate"},
    {"nbar", "--nbar", "bath occupation"},
    {"coupling", "--coupling", "jc | rabi"},
    {"n_max", "--n_max,--n-max", "photon cutoff"},
    {"t_max", "--t_max,--t-max", "final time (default 20/kappa)"},
    {"dt", "--dt", "time step (default min(0.01, 0.05/|H|))"},
    {"weight_l", "--weight_l,--weight", "initial excited-state weight"},
    {"out", "--out", "trajectory output path"},
    {"format", "--format", "csv | json"},
    {"record_every", "--record_every,--record-every", "time between recorded rows"},
};

void add_config_flags(CLI::App* cmd, bornsim::Settings& flags, std::string& config_path) {
    cmd->add_option("--config", config_path, "flat key = value config file");
    for (const auto& f : kFlags) {
        cmd->add_option_function<std::string>(
            f.names, [&flags, key = std::string(f.key)](const std::string& v) { flags[key] = v; }, f.help);
    }
}

bornsim::ScenarioConfig load(const bornsim::Settings& flags, const std::string& config_path) {
    bornsim::Settings file;
    if (!config_path.empty()) file = bornsim::read_settings_file(config_path);
    return bornsim::resolve_config(file, flags);
}

int print_convergence(const bornsim::ConvergenceReport& r) {
    std::cout << r.to_json().dump(2) << '\n';
    return r.pass ? 0 : kExitConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bornsim: Lindblad simulator for dot-photon measurement dynamics"};
    app.require_subcommand(1);

    bornsim::Settings run_flags;
    std::string run_config;
    bool check_convergence = false;
    auto* run = app.add_subcommand("run", "run a scenario and write trajectory and summary files");
    add_config_flags(run, run_flags, run_config);
    run->add_flag("--check-convergence", check_convergence, "embed a dt / n_max convergence report");

    bornsim::Settings conv_flags;
    std::string conv_config;
    auto* converge = app.add_subcommand("converge", "rerun with dt halved and n_max doubled");
    add_config_flags(converge, conv_flags, conv_config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            const auto config = load(run_flags, run_config);
            const auto result = bornsim::run_scenario(config, check_convergence);
            std::cout << "trajectory: " << result.trajectory_path.string() << '\n'
                      << "summary:    " << result.summary_path.string() << '\n';
            std::printf("p_measured    %.9f\ne_accumulated %.9f\n", result.summary["p_measured"].get<double>(),
                        result.summary["e_accumulated"].get<double>());
            if (check_convergence) {
                const bool pass = result.summary["convergence"]["status"] == "PASS";
                std::cout << "convergence:  " << (pass ? "PASS" : "FAIL") << '\n';
                if (!pass) return kExitConvergence;
            }
            return 0;
        }
        const auto config = load(conv_flags, conv_config);
        return print_convergence(bornsim::convergence_report(config));
    } catch (const bornsim::ConfigError& e) {
        std::cerr << "config error [" << e.field() << "]: " << e.what() << '\n';
        return kExitConfig;
    } catch (const bornsim::InvariantViolation& e) {
        std::cerr << "invariant violated [" << e.invariant() << "]: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const bornsim::InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
