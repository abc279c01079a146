#include "bornsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "bornsim/analytic.hpp"
#include "bornsim/observables.hpp"

namespace bornsim {

namespace {

using nlohmann::json;

constexpr long kTargetRows = 20000;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
        throw ConfigError(key, "config field '" + key + "': expected a number, got '" + text + "'");
    }
    return value;
}

long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(key, "config field '" + key + "': expected an integer, got '" + text + "'");
    }
    return value;
}

CouplingKind parse_coupling(const std::string& text) {
    if (text == "jc") return CouplingKind::JC;
    if (text == "rabi") return CouplingKind::Rabi;
    throw ConfigError("coupling", "config field 'coupling': expected \"jc\" or \"rabi\", got '" + text + "'");
}

OutputFormat parse_format(const std::string& text) {
    if (text == "csv") return OutputFormat::Csv;
    if (text == "json") return OutputFormat::Json;
    throw ConfigError("format", "config field 'format': expected \"csv\" or \"json\", got '" + text + "'");
}

void require_known_keys(const Settings& s) {
    const auto& keys = config_keys();
    for (const auto& [k, v] : s) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ConfigError(k, "unknown config key '" + k + "'");
        }
    }
}

std::string fmt12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x + 0.0);
    return buf;
}

json params_json(const ModelParams& p) {
    return json{{"omega0", p.omega0},
                {"E_e", p.E_e},
                {"E_g", p.E_g},
                {"lambda", p.lambda},
                {"kappa", p.kappa},
                {"nbar", p.nbar},
                {"coupling", p.coupling == CouplingKind::JC ? "jc" : "rabi"},
                {"n_max", p.cutoff.n_max}};
}

struct Peak {
    double value = 0.0;
    double time = 0.0;
};

Peak peak_of(const std::vector<double>& t, const std::vector<double>& v) {
    Peak p;
    if (v.empty()) return p;
    const auto it = std::max_element(v.begin(), v.end());
    p.value = *it;
    p.time = t[static_cast<std::size_t>(it - v.begin())];
    return p;
}

/// Value at the recorded time closest to `t`.
double sample_near(const Trajectory& traj, const std::vector<double>& v, double t) {
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    std::size_t i = static_cast<std::size_t>(it - traj.times.begin());
    if (i >= traj.size()) i = traj.size() - 1;
    if (i > 0 && std::abs(traj.times[i - 1] - t) < std::abs(traj.times[i] - t)) --i;
    return v[i];
}

bool is_resonant(const ModelParams& p) { return std::abs(p.detuning()) <= 1e-12; }

}  // namespace

std::string to_string(ScenarioName name) {
    switch (name) {
        case ScenarioName::Fig1: return "fig1";
        case ScenarioName::Fig2: return "fig2";
        case ScenarioName::Fig3a: return "fig3a";
        case ScenarioName::Fig3b: return "fig3b";
        case ScenarioName::FiniteT: return "finite_t";
        case ScenarioName::Custom: return "custom";
    }
    return "custom";
}

ScenarioName parse_scenario_name(const std::string& text) {
    for (ScenarioName n : {ScenarioName::Fig1, ScenarioName::Fig2, ScenarioName::Fig3a, ScenarioName::Fig3b,
                           ScenarioName::FiniteT, ScenarioName::Custom}) {
        if (to_string(n) == text) return n;
    }
    throw ConfigError("scenario", "unknown scenario '" + text + "' (fig1|fig2|fig3a|fig3b|finite_t|custom)");
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "omega0", "E_e", "E_g", "lambda", "kappa", "nbar", "coupling", "n_max", "t_max",
        "dt", "weight_l", "scenario", "out", "format", "record_every"};
    return keys;
}

Settings parse_settings(const std::string& text) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip a trailing comment unless the # sits inside quotes.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty() || value.empty()) {
            throw ConfigError(key, "config line " + std::to_string(line_no) + ": empty key or value");
        }
        if (out.count(key)) throw ConfigError(key, "duplicate config key '" + key + "'");
        out[key] = value;
    }
    require_known_keys(out);
    return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_settings(buffer.str());
}

Settings preset_settings(ScenarioName name) {
    // Shared figure values: omega0 = 1, E_e = 0, lambda = 0.01, kappa = 0.001.
    Settings s{{"omega0", "1"}, {"E_e", "0"}, {"E_g", "-1"}, {"lambda", "0.01"}, {"kappa", "0.001"},
               {"nbar", "0"},  {"coupling", "jc"}, {"weight_l", "1"}};
    switch (name) {
        case ScenarioName::Fig1:
        case ScenarioName::Fig2:
        case ScenarioName::Custom:
            break;
        case ScenarioName::Fig3a:
        case ScenarioName::Fig3b:
            s["coupling"] = "rabi";
            s["lambda"] = "0.5";
            s["kappa"] = "0.05";
            break;
        case ScenarioName::FiniteT:
            s["nbar"] = "0.2";
            s["weight_l"] = "0.3";
            break;
    }
    s["scenario"] = to_string(name);
    return s;
}

void ScenarioConfig::validate() const {
    try {
        params.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("params", e.what());
    }
    if (!(weight_l >= 0.0 && weight_l <= 1.0)) throw ConfigError("weight_l", "weight_l must lie in [0, 1]");
    if (!(grid.dt > 0.0)) throw ConfigError("dt", "dt must be > 0");
    if (!(grid.t_max >= grid.dt)) throw ConfigError("t_max", "t_max must be >= dt");
    if (grid.record_stride < 1) throw ConfigError("record_every", "record interval must be >= dt");
    try {
        (void)thermal_populations(params.nbar, params.cutoff);
    } catch (const InvalidArgument& e) {
        throw ConfigError("n_max", e.what());
    }
}

ScenarioConfig resolve_config(const Settings& file, const Settings& flags) {
    require_known_keys(file);
    require_known_keys(flags);
    std::string name = "custom";
    if (auto it = file.find("scenario"); it != file.end()) name = it->second;
    if (auto it = flags.find("scenario"); it != flags.end()) name = it->second;

    ScenarioConfig cfg;
    cfg.scenario = parse_scenario_name(name);
    Settings merged = preset_settings(cfg.scenario);
    for (const auto& [k, v] : file) merged[k] = v;
    for (const auto& [k, v] : flags) merged[k] = v;

    auto get = [&](const std::string& k) -> std::optional<std::string> {
        if (auto it = merged.find(k); it != merged.end()) return it->second;
        return std::nullopt;
    };

    ModelParams& p = cfg.params;
    p.omega0 = parse_double("omega0", *get("omega0"));
    p.E_e = parse_double("E_e", *get("E_e"));
    p.E_g = parse_double("E_g", *get("E_g"));
    p.lambda = parse_double("lambda", *get("lambda"));
    p.kappa = parse_double("kappa", *get("kappa"));
    p.nbar = parse_double("nbar", *get("nbar"));
    p.coupling = parse_coupling(*get("coupling"));
    cfg.weight_l = parse_double("weight_l", *get("weight_l"));

    if (auto v = get("n_max")) {
        const long n = parse_integer("n_max", *v);
        if (n < 0 || n > 1000) throw ConfigError("n_max", "n_max must lie in [0, 1000]");
        p.cutoff.n_max = static_cast<int>(n);
    } else {
        // JC at zero temperature never leaves n <= 1; the rest need a deeper ladder.
        p.cutoff.n_max = (p.coupling == CouplingKind::JC && p.nbar == 0.0) ? 2 : 24;
    }

    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("params", e.what());
    }

    if (auto v = get("t_max")) {
        cfg.grid.t_max = parse_double("t_max", *v);
    } else {
        if (!(p.kappa > 0.0)) throw ConfigError("t_max", "t_max is required when kappa = 0");
        cfg.grid.t_max = 20.0 / p.kappa;
    }
    cfg.grid.dt = get("dt") ? parse_double("dt", *get("dt")) : default_time_step(p);
    if (!(cfg.grid.dt > 0.0)) throw ConfigError("dt", "dt must be > 0");

    if (auto v = get("record_every")) {
        const double every = parse_double("record_every", *v);
        if (!(every > 0.0)) throw ConfigError("record_every", "record_every must be > 0");
        cfg.grid.record_stride = std::max(1L, std::lround(every / cfg.grid.dt));
    } else {
        const long steps = cfg.grid.steps();
        cfg.grid.record_stride = std::max(1L, (steps + kTargetRows - 1) / kTargetRows);
    }

    cfg.format = get("format") ? parse_format(*get("format")) : OutputFormat::Csv;
    if (auto v = get("out")) {
        cfg.out = *v;
    } else {
        cfg.out = to_string(cfg.scenario) + (cfg.format == OutputFormat::Csv ? ".csv" : ".json");
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig preset_config(ScenarioName name) {
    return resolve_config({}, Settings{{"scenario", to_string(name)}});
}

void check_trajectory_invariants(const Trajectory& traj, const ModelParams& params) {
    constexpr double upper = 1.0 + 1e-6;
    auto fail = [](const std::string& name, const std::string& what) { throw InvariantViolation(name, what); };
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.trace_error[i] > kTraceDriftLimit) fail("trace", "trace error exceeds 1e-6");
        const double p0 = traj.p_zero[i];
        if (p0 < -1e-6 || p0 > upper) fail("population_bounds", "P0 outside [0, 1]");
        if (traj.has_dressed) {
            for (double v : {traj.p_plus[i], traj.p_minus[i]}) {
                if (v < -1e-6 || v > upper) fail("population_bounds", "dressed population outside [0, 1]");
            }
        }
    }
    if (params.nbar == 0.0) {
        const auto counter = measured_probability_series(traj);
        for (std::size_t i = 1; i < counter.size(); ++i) {
            if (counter[i] < counter[i - 1] - 1e-12) fail("monotone_counter", "measured probability decreased");
        }
    }
}

const std::vector<std::string>& trajectory_columns() {
    static const std::vector<std::string> cols = {"t",   "n_photon", "P_plus",  "P_minus",    "ReP_pm", "P0",
                                                  "J_deriv", "J_dressed", "P_meas_cum", "E_acc", "trace_err"};
    return cols;
}

namespace {

struct Columns {
    std::vector<double> j_deriv;
    std::vector<double> j_dressed;
    std::vector<double> counter;
    std::vector<double> e_acc;
};

Columns derived_columns(const Trajectory& traj, const ModelParams& params) {
    Columns c;
    c.j_deriv = energy_current(traj, CurrentMethod::EnergyDerivative);
    if (traj.has_dressed) {
        c.j_dressed = energy_current(traj, params, dressed_basis(params, 1), CurrentMethod::DressedFormula);
    } else {
        c.j_dressed.assign(traj.size(), std::numeric_limits<double>::quiet_NaN());
    }
    c.counter = params.nbar == 0.0 ? measured_probability_series(traj) : effective_counter_series(traj);
    c.e_acc = accumulated_energy_series(traj);
    return c;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, const ModelParams& params) {
    const Columns c = derived_columns(traj, params);
    std::string out;
    const auto& cols = trajectory_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? "," : "") + cols[k];
    out += '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double row[] = {traj.times[i],   traj.photon_number[i], traj.p_plus[i],  traj.p_minus[i],
                              traj.p_pm[i].real(), traj.p_zero[i],   c.j_deriv[i],    c.j_dressed[i],
                              c.counter[i],    c.e_acc[i],           traj.trace_error[i]};
        for (std::size_t k = 0; k < std::size(row); ++k) {
            if (k) out += ',';
            out += fmt12(row[k]);
        }
        out += '\n';
    }
    return out;
}

json trajectory_json(const Trajectory& traj, const ModelParams& params) {
    const Columns c = derived_columns(traj, params);
    json rows = json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        rows.push_back({traj.times[i], traj.photon_number[i], traj.p_plus[i], traj.p_minus[i], traj.p_pm[i].real(),
                        traj.p_zero[i], c.j_deriv[i], c.j_dressed[i], c.counter[i], c.e_acc[i],
                        traj.trace_error[i]});
    }
    return json{{"columns", trajectory_columns()}, {"rows", std::move(rows)}};
}

std::filesystem::path summary_path_for(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    p.replace_extension();
    return p.string() + ".summary.json";
}

double max_observable_delta(const Trajectory& base, const Trajectory& finer) {
    if (base.size() != finer.size()) {
        throw DimensionMismatch("max_observable_delta: runs record different numbers of samples");
    }
    double delta = 0.0;
    auto cmp = [&](const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (std::isnan(a[i]) || std::isnan(b[i])) continue;
            delta = std::max(delta, std::abs(a[i] - b[i]));
        }
    };
    cmp(base.photon_number, finer.photon_number);
    cmp(base.p_zero, finer.p_zero);
    cmp(base.p_plus, finer.p_plus);
    cmp(base.p_minus, finer.p_minus);
    cmp(measured_probability_series(base), measured_probability_series(finer));
    cmp(effective_counter_series(base), effective_counter_series(finer));
    cmp(accumulated_energy_series(base), accumulated_energy_series(finer));
    return delta;
}

nlohmann::json ConvergenceReport::to_json() const {
    return json{{"performed", true},
                {"base_n_max", base_n_max},
                {"base_dt", base_dt},
                {"dt_delta", dt_delta},
                {"dt_tolerance", dt_tolerance},
                {"nmax_delta", nmax_delta},
                {"nmax_tolerance", nmax_tolerance},
                {"status", pass ? "PASS" : "FAIL"}};
}

ConvergenceReport convergence_report(const ScenarioConfig& config) {
    config.validate();
    ConvergenceReport report;
    report.base_n_max = config.params.cutoff.n_max;
    report.base_dt = config.grid.dt;
    report.nmax_tolerance = config.params.coupling == CouplingKind::JC ? 1e-6 : 1e-4;

    const DensityMatrix rho0 = initial_state(config.weight_l, config.params);
    const Trajectory base = evolve(rho0, config.params, config.grid);

    TimeGrid half = config.grid;
    half.dt = config.grid.dt / 2.0;
    half.record_stride = config.grid.record_stride * 2;
    report.dt_delta = max_observable_delta(base, evolve(rho0, config.params, half));

    ModelParams deeper = config.params;
    deeper.cutoff.n_max = std::max(1, 2 * config.params.cutoff.n_max);
    // Subdivide dt by an integer so recorded times coincide with the base run.
    const double needed = default_time_step(deeper);
    const long divisions = std::max(1L, static_cast<long>(std::ceil(config.grid.dt / needed - 1e-9)));
    TimeGrid deep_grid = config.grid;
    deep_grid.dt = config.grid.dt / static_cast<double>(divisions);
    deep_grid.record_stride = config.grid.record_stride * divisions;
    const Trajectory deep = evolve(initial_state(config.weight_l, deeper), deeper, deep_grid);
    report.nmax_delta = max_observable_delta(base, deep);

    report.pass = report.dt_delta < report.dt_tolerance && report.nmax_delta < report.nmax_tolerance;
    return report;
}

RunResult run_scenario(const ScenarioConfig& config, bool with_convergence) {
    config.validate();
    const ModelParams& p = config.params;
    RunResult result;
    result.trajectory = evolve(initial_state(config.weight_l, p), p, config.grid);
    const Trajectory& traj = result.trajectory;
    check_trajectory_invariants(traj, p);

    const double t_end = traj.times.back();
    const bool horizon_ok = p.kappa > 0.0 && t_end + 0.5 * traj.dt >= 20.0 / p.kappa;
    const double counter = p.nbar == 0.0 ? measured_probability_series(traj).back()
                                         : effective_counter_series(traj).back();
    const double e_acc = accumulated_energy(traj);
    const Peak n_peak = peak_of(traj.times, traj.photon_number);

    json analytic = json::object();
    json deviations = json::object();
    json numeric = {{"peak_photon_number", n_peak.value},
                    {"peak_time", n_peak.time},
                    {"final_photon_number", traj.photon_number.back()},
                    {"horizon_ok", horizon_ok},
                    {"max_trace_error", *std::max_element(traj.trace_error.begin(), traj.trace_error.end())},
                    {"max_hermiticity_drift", traj.max_hermiticity_drift}};

    if (p.coupling == CouplingKind::JC && p.nbar == 0.0) {
        analytic["born_weight"] = config.weight_l;
        analytic["energy_identity"] = -p.E_g * config.weight_l;
        deviations["p_measured_minus_born"] = counter - config.weight_l;
        deviations["e_accumulated_minus_identity"] = e_acc + p.E_g * config.weight_l;
        if (p.lambda > 0.0) {
            const double sp = analytic::secular_measured_probability(p, config.weight_l, t_end);
            const double se = analytic::secular_accumulated_energy(p, config.weight_l, t_end);
            analytic["secular_p_measured"] = sp;
            analytic["secular_p_measured_limit"] = analytic::secular_measured_probability_limit(p, config.weight_l);
            analytic["secular_e_accumulated"] = se;
            deviations["p_measured_minus_secular"] = counter - sp;
            deviations["e_accumulated_minus_secular"] = e_acc - se;
        }
        if (traj.has_dressed) {
            numeric["channel_energy"] = channel_energy(traj, dressed_basis(p, 1));
        }
        if (is_resonant(p) && p.lambda > 0.0 && p.kappa > 0.0) {
            std::vector<double> closed(traj.size());
            double max_dev = 0.0;
            for (std::size_t i = 0; i < traj.size(); ++i) {
                closed[i] = analytic::resonance_closed_forms(p, traj.times[i], config.weight_l).photon_number;
                max_dev = std::max(max_dev, std::abs(closed[i] - traj.photon_number[i]));
            }
            const Peak a_peak = peak_of(traj.times, closed);
            const auto sched = analytic::quasi_step_schedule(p);
            analytic["peak_photon_number"] = a_peak.value;
            analytic["peak_time"] = a_peak.time;
            analytic["quasi_step"] = {{"period", sched.period},
                                      {"n_c", sched.critical_number},
                                      {"t_c", sched.critical_time}};
            deviations["peak_photon_number"] = n_peak.value - a_peak.value;
            deviations["max_photon_number_vs_closed_form"] = max_dev;
        }
    } else if (p.coupling == CouplingKind::JC) {
        const auto pred = analytic::finite_T_prediction(p, config.weight_l);
        analytic["effective_counter"] = pred.effective_counter;
        analytic["partition"] = pred.partition;
        analytic["dot_partition"] = pred.dot_partition;
        analytic["energy_loss"] = pred.energy_loss;
        deviations["effective_counter_relative"] =
            pred.effective_counter != 0.0 ? (counter - pred.effective_counter) / pred.effective_counter : counter;
        deviations["energy_loss"] = e_acc - pred.energy_loss;
    } else {
        const auto pert = analytic::rabi_perturbation(p, 0);
        analytic["steady_photon_number"] = pert.steady_photons;
        analytic["E_0_plus"] = pert.E_plus;
        analytic["E_0_minus"] = pert.E_minus;
        if (p.kappa > 0.0) {
            if (t_end >= 10.0 / p.kappa) {
                numeric["photon_number_at_kappa_t_10"] = sample_near(traj, traj.photon_number, 10.0 / p.kappa);
            }
            const SteadyStateResult ss = steady_state(p, DensityMatrix::unchecked(traj.final_state));
            const double n_ss = photon_number(ss.rho);
            numeric["steady_photon_number"] = n_ss;
            numeric["steady_criterion"] = ss.criterion == SteadyCriterion::Residual ? "residual" : "horizon";
            numeric["steady_residual"] = ss.residual;
            numeric["steady_flagged"] = ss.flagged;
            deviations["steady_photon_number_relative"] =
                pert.steady_photons > 0.0 ? (n_ss - pert.steady_photons) / pert.steady_photons : n_ss;
        }
    }

    json summary = {{"scenario", to_string(config.scenario)},
                    {"params", params_json(p)},
                    {"weight_l", config.weight_l},
                    {"grid", {{"t_max", config.grid.t_max}, {"dt", config.grid.dt},
                              {"record_stride", config.grid.record_stride}}},
                    {"p_measured", counter},
                    {"e_accumulated", e_acc},
                    {"numeric", numeric},
                    {"analytic", analytic},
                    {"deviations", deviations},
                    {"convergence", {{"performed", false}}}};
    if (with_convergence) summary["convergence"] = convergence_report(config).to_json();

    result.trajectory_path = config.out;
    result.summary_path = summary_path_for(config.out);
    if (config.out.has_parent_path()) std::filesystem::create_directories(config.out.parent_path());
    {
        std::ofstream f(result.trajectory_path, std::ios::binary);
        if (!f) throw ConfigError("out", "cannot write '" + result.trajectory_path.string() + "'");
        if (config.format == OutputFormat::Csv) {
            f << trajectory_csv(traj, p);
        } else {
            f << trajectory_json(traj, p).dump() << '\n';
        }
    }
    {
        std::ofstream f(result.summary_path, std::ios::binary);
        if (!f) throw ConfigError("out", "cannot write '" + result.summary_path.string() + "'");
        f << summary.dump(2) << '\n';
    }
    result.summary = std::move(summary);
    return result;
}

}  // namespace bornsim
