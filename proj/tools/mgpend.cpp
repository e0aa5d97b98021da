// Command-line front end: noise budgets, requirement checks, ring-down
// synthesis and analysis, and parameter sweeps.
//
// Exit codes: 0 success, 1 requirement check failed, 2 configuration or
// usage error, 3 I/O error, 4 analysis-domain error.

#include "mgpend/mgpend.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

using namespace mgpend;

namespace {

enum ExitCode { kOk = 0, kRequirementFailed = 1, kConfigError = 2, kIoError = 3, kAnalysisError = 4 };

struct ConfigSource {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("-c,--config", config_path, "JSON experiment configuration");
        cmd->add_option("--preset", preset, "Built-in parameter set")->check(CLI::IsMember({"reference", "paper"}));
        cmd->add_option("--set", overrides, "Override a field, e.g. --set environment.temperature=0.003");
    }

    ExperimentConfig load() const
    {
        json doc = config_to_json(reference_preset());
        if (!config_path.empty()) {
            const json file_doc = parse_json_text(read_file(config_path), config_path);
            doc = config_to_json(config_from_json(file_doc));
        }
        for (const auto& item : overrides) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects path=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const std::string text = item.substr(eq + 1);
            json value = json::parse(text, nullptr, false);
            if (value.is_discarded()) value = text;
            set_config_value(doc, key, value);
        }
        return config_from_json(doc);
    }
};

void print_warnings(const ExperimentConfig& cfg)
{
    for (const auto& w : warnings(cfg.pendulum.fiber)) std::cerr << "warning: " << w << "\n";
    for (const auto& w : warnings(cfg.pendulum.test_mass, cfg.pendulum.fiber.material.density)) {
        std::cerr << "warning: " << w << "\n";
    }
}

std::optional<double> pinned_omega(const ExperimentConfig& cfg)
{
    if (cfg.effective_frequency_hz) return to_omega(*cfg.effective_frequency_hz);
    return std::nullopt;
}

RequirementReport run_check(const ExperimentConfig& cfg)
{
    const auto grid = log_grid(cfg.grid);
    return effective_requirements(cfg.pendulum, cfg.cavity, cfg.pendulum.env.temperature, grid, pinned_omega(cfg),
                                  cfg.budget);
}

// ---------------------------------------------------------------------------
// budget

struct OverlayPoint {
    double mass;
    double dissipation_hz;
    std::string label;
};

std::vector<OverlayPoint> read_overlay(const std::string& path)
{
    std::istringstream in(read_file(path));
    std::string line;
    std::getline(in, line);
    std::vector<OverlayPoint> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (cols.size() < 2) throw ConfigError(path + ": overlay rows need mass_kg,dissipation_hz[,label]");
        try {
            out.push_back({parse_number(cols[0]), parse_number(cols[1]), cols.size() > 2 ? cols[2] : ""});
        } catch (const DomainError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    return out;
}

std::string overlay_svg(const std::vector<OverlayPoint>& points, const ExperimentConfig& cfg)
{
    SvgPlot plot;
    plot.title = "Mechanical dissipation vs mass";
    plot.x_label = "Mass [kg]";
    plot.y_label = "gamma_m / 2pi [Hz]";
    SvgSeries lit{"published", {}, {}, "#1f77b4", false, true};
    for (const auto& p : points) {
        lit.x.push_back(p.mass);
        lit.y.push_back(p.dissipation_hz);
    }
    const Mode pend = pendulum_mode(cfg.pendulum);
    SvgSeries self{"this pendulum", {cfg.pendulum.test_mass.mass}, {to_hz(pend.omega) / pend.quality_factor},
                   "#d62728", false, true};
    plot.series = {lit, self};
    return render_loglog(plot);
}

int cmd_budget(const ConfigSource& src, const std::string& out_path, const std::string& format,
               const std::string& overlay_path)
{
    const ExperimentConfig cfg = src.load();
    print_warnings(cfg);
    const auto grid = log_grid(cfg.grid);
    const Budget budget = assemble_budget(cfg.pendulum, cfg.cavity, grid, cfg.budget);
    std::string content;
    if (format == "csv") {
        content = budget_to_csv(budget);
    } else if (format == "json") {
        content = budget_to_json(budget).dump(2) + "\n";
    } else {
        content = budget_to_svg(budget);
    }
    std::vector<OverlayPoint> overlay;
    if (!overlay_path.empty()) overlay = read_overlay(overlay_path);
    write_file(out_path, content);
    if (!overlay_path.empty()) {
        std::string overlay_out = out_path;
        if (overlay_out.size() > 4 && overlay_out.substr(overlay_out.size() - 4) == ".svg") overlay_out.resize(overlay_out.size() - 4);
        overlay_out += "_dissipation.svg";
        write_file(overlay_out, overlay_svg(overlay, cfg));
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const ConfigSource& src, const std::string& json_path)
{
    const ExperimentConfig cfg = src.load();
    print_warnings(cfg);
    const RequirementReport report = run_check(cfg);
    const std::string doc = report_to_json(report).dump(2) + "\n";
    std::cout << report_to_text(report) << "\n" << doc;
    if (!json_path.empty()) write_file(json_path, doc);
    return report.pass() ? kOk : kRequirementFailed;
}

// ---------------------------------------------------------------------------
// ringdown

int cmd_synth(const SynthesisParams& params, const std::string& out_path)
{
    RingdownTrace trace;
    try {
        trace = synthesize_ringdown(params);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("synth: ") + e.what());
    }
    const std::string csv = trace_to_csv(trace);
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return kOk;
}

int cmd_fit(const std::vector<std::string>& inputs, double f0, double bandwidth, double bin_seconds, bool nonlinear,
            const std::string& out_path)
{
    std::vector<RingdownTrace> traces;
    for (const auto& path : inputs) {
        try {
            traces.push_back(trace_from_csv(read_file(path), path));
        } catch (const DomainError& e) {
            throw AnalysisError("input", e.what());
        }
    }
    MeasureOptions opts;
    opts.fit.nonlinear_refine = nonlinear;
    const RingdownFit fit = measure_q(traces, f0, bandwidth, bin_seconds, opts);
    const std::string doc = fit_to_json(fit).dump(2) + "\n";
    if (out_path.empty() || out_path == "-") {
        std::cout << doc;
    } else {
        write_file(out_path, doc);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// sweep

const std::vector<std::string>& sweep_metrics()
{
    static const std::vector<std::string> m{"q_ideal", "eq2_edge_hz", "sub_sql_lo", "sub_sql_hi", "f_violin1", "omega_eff"};
    return m;
}

double evaluate_metric(const ExperimentConfig& cfg, const std::string& metric)
{
    const PendulumModel& p = cfg.pendulum;
    if (metric == "q_ideal") return diluted_pendulum_q(p.fiber, p.test_mass.mass, material_q(p.fiber.material));
    if (metric == "eq2_edge_hz") {
        const Mode pend = pendulum_mode(p);
        return measurement_band_edge(pend.omega, pend.quality_factor, p.env.temperature);
    }
    if (metric == "f_violin1") {
        return to_hz(violin_modes(p.fiber, p.test_mass.mass, 1, material_q(p.fiber.material), cfg.budget.violin)[0].omega);
    }
    if (metric == "omega_eff") {
        const Mode pend = pendulum_mode(p);
        if (cfg.effective_frequency_hz) {
            return effective_oscillator_at(pend.omega, pend.quality_factor, p.test_mass.mass,
                                           to_omega(*cfg.effective_frequency_hz))
                .omega_eff;
        }
        return effective_oscillator(p, cfg.cavity).omega_eff;
    }
    // sub_sql_lo / sub_sql_hi: lowest thermal sub-SQL interval
    BudgetOptions opts = cfg.budget;
    opts.include_quantum = false;
    opts.include_suspension = true;
    const auto grid = log_grid(cfg.grid);
    const auto bands = sub_sql_band(assemble_budget(p, cfg.cavity, grid, opts), BandSelection::ThermalOnly);
    if (bands.empty()) return std::numeric_limits<double>::quiet_NaN();
    return metric == "sub_sql_lo" ? bands.front().lo : bands.front().hi;
}

int cmd_sweep(const ConfigSource& src, const std::string& param, double from, double to, int steps,
              const std::string& metric, const std::string& out_path)
{
    if (std::find(sweep_metrics().begin(), sweep_metrics().end(), metric) == sweep_metrics().end()) {
        throw ConfigError("unknown metric '" + metric + "'");
    }
    if (steps < 2) throw ConfigError("--steps must be >= 2");
    const json base = config_to_json(src.load());
    get_config_number(base, param);

    std::string csv = param + "," + metric + "\n";
    for (int i = 0; i < steps; ++i) {
        const double value = from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);
        json doc = base;
        set_config_value(doc, param, value);
        const ExperimentConfig cfg = config_from_json(doc);
        csv += format_number(value) + "," + format_number(evaluate_metric(cfg, metric)) + "\n";
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << csv;
    } else {
        write_file(out_path, csv);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Noise budgets, quantum-control requirement checks and ring-down Q analysis for a "
                 "milligram-scale monolithic pendulum"};
    app.require_subcommand(1);

    ConfigSource budget_src;
    std::string budget_out;
    std::string budget_format = "csv";
    std::string overlay;
    auto* budget = app.add_subcommand("budget", "Write the displacement noise budget");
    budget_src.attach(budget);
    budget->add_option("-o,--out", budget_out, "Output file")->required();
    budget->add_option("-f,--format", budget_format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
    budget->add_option("--overlay", overlay, "CSV of literature points (mass_kg,dissipation_hz[,label])");

    ConfigSource check_src;
    std::string check_json;
    auto* check = app.add_subcommand("check", "Evaluate the quantum-control requirements");
    check_src.attach(check);
    check->add_option("--json", check_json, "Also write the JSON report to this file");

    auto* ringdown = app.add_subcommand("ringdown", "Synthesize or analyse ring-down traces");
    ringdown->require_subcommand(1);
    SynthesisParams synth_params;
    double drift_uhz = 0.0;
    std::string synth_out;
    auto* synth = ringdown->add_subcommand("synth", "Write a synthetic ring-down trace as CSV");
    synth->add_option("--f0", synth_params.f0, "Mode frequency [Hz]");
    synth->add_option("--q", synth_params.q, "Quality factor");
    synth->add_option("--sample-rate", synth_params.sample_rate, "Sample rate [Hz]");
    synth->add_option("--duration", synth_params.duration, "Record length [s]");
    synth->add_option("--amplitude", synth_params.amplitude, "Initial amplitude");
    synth->add_option("--noise-rms", synth_params.noise_rms, "White-noise rms per sample");
    synth->add_option("--seed", synth_params.seed, "Random seed");
    synth->add_option("--phase", synth_params.phase, "Initial phase [rad]");
    auto* drift_opt = synth->add_option("--drift-uhz", drift_uhz, "Peak frequency wander [uHz]");
    synth->add_option("-o,--out", synth_out, "Output CSV (stdout if omitted)");

    std::vector<std::string> fit_inputs;
    RingdownDefaults fit_defaults;
    bool nonlinear = false;
    std::string fit_out;
    auto* fit = ringdown->add_subcommand("fit", "Estimate Q from one or more trace CSVs (aggregated)");
    fit->add_option("inputs", fit_inputs, "Trace CSV files (time_s,value)")->required();
    fit->add_option("--f0", fit_defaults.f0, "Mode frequency [Hz]");
    fit->add_option("--bandwidth", fit_defaults.bandwidth, "Band-pass width [Hz]");
    fit->add_option("--bin-seconds", fit_defaults.bin_seconds, "Time-bin width [s]");
    fit->add_flag("--nonlinear", nonlinear, "Refine with a weighted nonlinear exponential fit");
    fit->add_option("-o,--out", fit_out, "Output JSON (stdout if omitted)");

    ConfigSource sweep_src;
    std::string param;
    std::string metric;
    double from = 0.0;
    double to = 0.0;
    int steps = 2;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Sweep one numeric config field and report a metric");
    sweep_src.attach(sweep);
    sweep->add_option("--param", param, "Dotted config path, e.g. fiber.radius")->required();
    sweep->add_option("--from", from, "First value")->required();
    sweep->add_option("--to", to, "Last value")->required();
    sweep->add_option("--steps", steps, "Number of points (>= 2)");
    sweep->add_option("--metric", metric,
                      "q_ideal, eq2_edge_hz, sub_sql_lo, sub_sql_hi, f_violin1 or omega_eff")
        ->required();
    sweep->add_option("-o,--out", sweep_out, "Output CSV (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*budget) return cmd_budget(budget_src, budget_out, budget_format, overlay);
        if (*check) return cmd_check(check_src, check_json);
        if (*synth) {
            if (drift_opt->count() > 0) synth_params.drift_uhz = drift_uhz;
            return cmd_synth(synth_params, synth_out);
        }
        if (*fit) {
            return cmd_fit(fit_inputs, fit_defaults.f0, fit_defaults.bandwidth, fit_defaults.bin_seconds, nonlinear,
                           fit_out);
        }
        if (*sweep) return cmd_sweep(sweep_src, param, from, to, steps, metric, sweep_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const AnalysisError& e) {
        std::cerr << "analysis error in stage '" << e.stage() << "': " << e.what() << "\n";
        return kAnalysisError;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kAnalysisError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
