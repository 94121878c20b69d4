// Command-line surface: single-point rate evaluation, distance sweeps,
// parameter optimization, Monte-Carlo validation and oracle checks.
//
// Exit codes: 0 success, 2 configuration error, 3 validation/oracle failure.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scfqkd/fock.hpp"
#include "scfqkd/montecarlo.hpp"
#include "scfqkd/optimize.hpp"
#include "scfqkd/pipeline.hpp"

using nlohmann::json;
using namespace scfqkd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;

struct RunConfig {
    ProtocolConfig protocol;
    ChannelConfig channel;
};

// Flat JSON object with keys mirroring the config field names. Unknown
// keys are rejected; missing keys keep their defaults.
RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", "JSON parse failure in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config", "top level must be a flat JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number())
            throw ConfigError(key, "config values must be numbers");
        const double v = value.get<double>();
        if (key == "nu_upper_A") cfg.protocol.nu_upper_a = v;
        else if (key == "nu_upper_B") cfg.protocol.nu_upper_b = v;
        else if (key == "mu_upper_A") cfg.protocol.mu_upper_a = v;
        else if (key == "mu_upper_B") cfg.protocol.mu_upper_b = v;
        else if (key == "p0") cfg.protocol.p0 = v;
        else if (key == "r") cfg.protocol.r = v;
        else if (key == "N") cfg.protocol.n_windows = v;
        else if (key == "distance_km") cfg.channel.distance_km = v;
        else if (key == "alpha_f") cfg.channel.alpha_f = v;
        else if (key == "eta_d") cfg.channel.eta_d = v;
        else if (key == "p_d") cfg.channel.p_d = v;
        else if (key == "E_d") cfg.channel.e_d = v;
        else if (key == "f") cfg.channel.f = v;
        else throw ConfigError(key, "unknown config key");
    }
    return cfg;
}

json config_to_json(const RunConfig& cfg) {
    return json{{"nu_upper_A", cfg.protocol.nu_upper_a}, {"nu_upper_B", cfg.protocol.nu_upper_b},
                {"mu_upper_A", cfg.protocol.mu_upper_a}, {"mu_upper_B", cfg.protocol.mu_upper_b},
                {"p0", cfg.protocol.p0},                 {"r", cfg.protocol.r},
                {"N", cfg.protocol.n_windows},           {"distance_km", cfg.channel.distance_km},
                {"alpha_f", cfg.channel.alpha_f},        {"eta_d", cfg.channel.eta_d},
                {"p_d", cfg.channel.p_d},                {"E_d", cfg.channel.e_d},
                {"f", cfg.channel.f}};
}

void write_sidecar(const std::string& out_path, const RunConfig& cfg, const json& run_info) {
    if (out_path.empty()) return;
    json sidecar = config_to_json(cfg);
    sidecar["run"] = run_info;
    std::ofstream out(out_path + ".config.json");
    out << sidecar.dump(2) << "\n";
}

std::string fmt17(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::vector<Mode> parse_modes(const std::vector<std::string>& names) {
    std::vector<Mode> modes;
    for (const auto& name : names) modes.push_back(mode_from_string(name));
    if (modes.empty()) modes.push_back(Mode::original);
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    return modes;
}

std::string report_flags(const KeyRateReport& report, bool mu_at_bound = false,
                         bool no_key_override = false) {
    std::vector<std::string> flags;
    if (report.no_key || no_key_override) flags.emplace_back("no_key");
    if (report.clamped) flags.emplace_back("clamped");
    if (report.summary.nph_clamped) flags.emplace_back("nph_clamped");
    if (mu_at_bound) flags.emplace_back("mu_at_bound");
    std::string joined;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) joined += ';';
        joined += flags[i];
    }
    return joined;
}

constexpr const char* kCsvHeader = "distance_km,nu,mode,p0_opt,mu_opt,key_rate,e_ph,E_K,flags";

struct CsvRow {
    double distance, nu;
    Mode mode;
    double p0, mu, key_rate, e_ph, e_k;
    std::string flags;
};

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows) {
    out << kCsvHeader << "\n";
    for (const auto& row : rows) {
        out << fmt17(row.distance) << ',' << fmt17(row.nu) << ',' << to_string(row.mode) << ','
            << fmt17(row.p0) << ',' << fmt17(row.mu) << ',' << fmt17(row.key_rate) << ','
            << fmt17(row.e_ph) << ',' << fmt17(row.e_k) << ',' << row.flags << "\n";
    }
}

void print_report(std::ostream& out, const PipelineResult& result, const ChannelConfig& channel) {
    const auto& stats = result.stats;
    const auto& summary = result.summary;
    const auto& report = result.report;
    out << "mode            " << to_string(report.mode) << "\n"
        << "distance_km     " << fmt17(channel.distance_km) << "\n"
        << "eta_side        " << fmt17(side_transmittance(channel)) << "\n"
        << "S_O (L, R)      " << fmt17(stats.s_o_l) << "  " << fmt17(stats.s_o_r) << "\n"
        << "S_B (L, R)      " << fmt17(stats.s_b_l) << "  " << fmt17(stats.s_b_r) << "\n"
        << "S_Z (L, R)      " << fmt17(stats.s_z_l) << "  " << fmt17(stats.s_z_r) << "\n"
        << "D_eff           " << fmt17(stats.d_eff) << "\n"
        << "E_K             " << fmt17(stats.e_k) << "\n"
        << "c0, c1, c2_bar  " << fmt17(summary.c0) << "  " << fmt17(summary.c1) << "  "
        << fmt17(summary.c2_bar) << "\n"
        << "n_ph_upper / N  " << fmt17(summary.n_ph_upper) << "\n"
        << "n_u / N         " << fmt17(summary.n_u) << "\n"
        << "e_ph_upper      " << fmt17(summary.e_ph_upper) << "\n";
    if (report.mode == Mode::twcc) {
        const auto& t = report.twcc;
        out << "twcc n_t1..3    " << fmt17(t.n_t1) << "  " << fmt17(t.n_t2) << "  "
            << fmt17(t.n_t3) << "\n"
            << "twcc E_1..3     " << fmt17(t.e_1) << "  " << fmt17(t.e_2) << "  " << fmt17(t.e_3)
            << "\n";
    } else if (report.mode == Mode::aopp) {
        const auto& a = report.aopp;
        out << "aopp n_b0,n_b1  " << fmt17(a.n_b0) << "  " << fmt17(a.n_b1) << "\n"
            << "aopp n_u0,n_u1  " << fmt17(a.n_u0) << "  " << fmt17(a.n_u1) << "\n"
            << "aopp n_g        " << fmt17(a.n_g) << "\n"
            << "aopp n_t,E      " << fmt17(a.n_t_aopp) << "  " << fmt17(a.e_aopp) << "\n";
    }
    out << "key_rate        " << fmt17(report.key_rate);
    const std::string flags = report_flags(report);
    if (!flags.empty()) out << "   [" << flags << "]";
    out << "\n";
}

int cmd_rate(const RunConfig& cfg, const std::vector<Mode>& modes, const std::string& out_path) {
    std::vector<CsvRow> rows;
    for (const Mode mode : modes) {
        // Rates are reported per window: evaluate with N = 1.
        ProtocolConfig protocol = cfg.protocol;
        protocol.n_windows = 1.0;
        const PipelineResult result = evaluate_pipeline(protocol, cfg.channel, mode);
        print_report(std::cout, result, cfg.channel);
        std::cout << "\n";
        rows.push_back(CsvRow{cfg.channel.distance_km,
                              0.5 * (cfg.protocol.nu_upper_a + cfg.protocol.nu_upper_b), mode,
                              cfg.protocol.p0, 0.5 * (cfg.protocol.mu_upper_a + cfg.protocol.mu_upper_b),
                              result.report.key_rate, result.summary.e_ph_upper, result.stats.e_k,
                              report_flags(result.report)});
    }
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("out", "cannot open '" + out_path + "' for writing");
        write_csv(out, rows);
        write_sidecar(out_path, cfg, json{{"command", "rate"}});
    }
    return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, double nu, Mode mode) {
    OptimizationProblem problem;
    problem.nu = nu;
    problem.mode = mode;
    const OptimizationResult result = optimize_key_rate(problem, cfg.channel);
    std::cout << "mode       " << to_string(mode) << "\n"
              << "distance   " << fmt17(cfg.channel.distance_km) << "\n"
              << "nu         " << fmt17(nu) << "\n"
              << "p0_opt     " << fmt17(result.p0) << "\n"
              << "mu_opt     " << fmt17(result.mu) << "\n"
              << "key_rate   " << fmt17(result.key_rate) << "\n";
    if (result.no_key) std::cout << "flags      no_key\n";
    else if (result.mu_at_bound) std::cout << "flags      mu_at_bound\n";
    return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, double d_min, double d_max, double step,
              std::vector<double> nus, const std::vector<Mode>& modes, bool fixed_params,
              int workers, const std::string& out_path, const std::string& plot_path) {
    if (!(step > 0.0)) throw ConfigError("step", "must be > 0");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (nus.empty()) nus.push_back(0.5 * (cfg.protocol.nu_upper_a + cfg.protocol.nu_upper_b));
    std::sort(nus.begin(), nus.end());
    nus.erase(std::unique(nus.begin(), nus.end()), nus.end());

    std::vector<double> distances;
    for (double d = d_min; d <= d_max + 1e-9; d += step) distances.push_back(d);

    struct Task {
        double distance, nu;
        Mode mode;
    };
    std::vector<Task> tasks;
    for (const double d : distances)
        for (const double nu : nus)
            for (const Mode mode : modes) tasks.push_back(Task{d, nu, mode});

    std::vector<CsvRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto run_task = [&](std::size_t index) {
        const Task& task = tasks[index];
        ChannelConfig channel = cfg.channel;
        channel.distance_km = task.distance;
        CsvRow row;
        row.distance = task.distance;
        row.nu = task.nu;
        row.mode = task.mode;
        if (fixed_params) {
            ProtocolConfig protocol = cfg.protocol;
            protocol.nu_upper_a = protocol.nu_upper_b = task.nu;
            protocol.n_windows = 1.0;
            const PipelineResult result = evaluate_pipeline(protocol, channel, task.mode);
            row.p0 = protocol.p0;
            row.mu = 0.5 * (protocol.mu_upper_a + protocol.mu_upper_b);
            row.key_rate = result.report.key_rate;
            row.e_ph = result.summary.e_ph_upper;
            row.e_k = result.stats.e_k;
            row.flags = report_flags(result.report);
        } else {
            OptimizationProblem problem;
            problem.nu = task.nu;
            problem.mode = task.mode;
            const OptimizationResult opt = optimize_key_rate(problem, channel);
            row.p0 = opt.p0;
            row.mu = opt.mu;
            row.key_rate = opt.key_rate;
            if (opt.no_key) {
                row.e_ph = 1.0;
                row.e_k = 0.0;
                row.flags = "no_key";
            } else {
                const ProtocolConfig protocol =
                    ProtocolConfig::symmetric(task.nu, opt.mu, opt.p0, 0.0, 1.0);
                const PipelineResult result = evaluate_pipeline(protocol, channel, task.mode);
                row.e_ph = result.summary.e_ph_upper;
                row.e_k = result.stats.e_k;
                row.flags = report_flags(result.report, opt.mu_at_bound);
            }
        }
        rows[index] = std::move(row);
    };

    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::vector<std::thread> pool;
        const int n_threads = std::min<int>(workers, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    run_task(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    if (out_path.empty()) {
        write_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("out", "cannot open '" + out_path + "' for writing");
        write_csv(out, rows);
        write_sidecar(out_path, cfg,
                      json{{"command", "sweep"},
                           {"d_min", d_min},
                           {"d_max", d_max},
                           {"step", step},
                           {"nu", nus},
                           {"fixed_params", fixed_params},
                           {"workers", workers}});
    }

    if (!plot_path.empty()) {
        std::ofstream plot(plot_path);
        if (!plot) throw ConfigError("emit-plot-script", "cannot open '" + plot_path + "'");
        plot << "#!/usr/bin/env python3\n"
                "# Renders a sweep CSV as log-scale key rate vs distance.\n"
                "import csv, sys\n"
                "from collections import defaultdict\n"
                "import matplotlib.pyplot as plt\n"
                "path = sys.argv[1] if len(sys.argv) > 1 else "
             << (out_path.empty() ? std::string("'sweep.csv'") : "'" + out_path + "'")
             << "\n"
                "curves = defaultdict(list)\n"
                "with open(path) as fh:\n"
                "    for row in csv.DictReader(fh):\n"
                "        rate = float(row['key_rate'])\n"
                "        if rate > 0:\n"
                "            curves[(row['nu'], row['mode'])].append((float(row['distance_km']), rate))\n"
                "for (nu, mode), points in sorted(curves.items()):\n"
                "    points.sort()\n"
                "    plt.semilogy([p[0] for p in points], [p[1] for p in points], label=f'nu={nu} {mode}')\n"
                "plt.xlabel('distance (km)')\n"
                "plt.ylabel('key rate per window')\n"
                "plt.legend()\n"
                "plt.tight_layout()\n"
                "plt.savefig('sweep.png', dpi=160)\n"
                "print('wrote sweep.png')\n";
    }
    return kExitOk;
}

int cmd_mc(const RunConfig& cfg, std::uint64_t seed, int workers) {
    if (!(cfg.protocol.r > 0.0))
        throw ConfigError("r", "Monte-Carlo frequency estimation divides by r; set r > 0");
    const mc::SimResult sim = mc::simulate_counts(cfg.protocol, cfg.channel, mc::SimSeed{seed},
                                                  workers);
    const mc::McValidation validation =
        mc::validate_against_analytic(sim, cfg.protocol, cfg.channel);

    std::cout << "windows " << fmt17(cfg.protocol.n_windows) << "  seed " << seed << "\n";
    std::cout << "count     observed      expected          sigma        z\n";
    for (const auto& check : validation.counts) {
        std::printf("%-8s %10.0f %15.3f %12.3f %8.3f\n", check.label.c_str(), check.observed,
                    check.expected, check.sigma, check.z);
    }
    std::printf("e_ph      mc %.8g  analytic %.8g  sigma %.3g  z %.3f\n", validation.e_ph_mc,
                validation.e_ph_analytic, validation.e_ph_sigma, validation.e_ph_z);

    const WindowStats estimated = mc::estimate_stats(sim.counts, cfg.protocol);
    const TwccStats twcc = mc::simulate_twcc(sim.sample, mc::SimSeed{seed});
    const AoppStats aopp = mc::simulate_aopp(sim.sample, mc::SimSeed{seed});
    for (const Mode mode : {Mode::original, Mode::twcc, Mode::aopp}) {
        const KeyRateReport report =
            report_from_stats(estimated, cfg.protocol, cfg.channel, mode, &twcc, &aopp);
        std::cout << "key_rate[" << to_string(mode) << "] " << fmt17(report.key_rate);
        const std::string flags = report_flags(report);
        if (!flags.empty()) std::cout << "  [" << flags << "]";
        std::cout << "\n";
    }

    const bool ok = validation.counts_ok(5.0) && validation.e_ph_ok(3.0);
    std::cout << (ok ? "mc-vs-analytic: PASS" : "mc-vs-analytic: FAIL") << "\n";
    return ok ? kExitOk : kExitValidation;
}

int cmd_oracle_check(const RunConfig& cfg, int grid, double max_intensity,
                     std::vector<double> eds, int n_max, double inject_error) {
    if (grid < 2) throw ConfigError("grid", "need at least 2 grid points");
    if (eds.empty()) eds = {0.0, 0.04, 0.10};
    // Raw intensities enter the comparison directly: unit transmittance.
    ChannelConfig channel = cfg.channel;
    channel.distance_km = 0.0;
    channel.eta_d = 1.0;

    bool pass = true;
    std::printf("%-6s %-12s %-12s\n", "E_d", "max|dS_L|", "max|dS_R|");
    for (const double e_d : eds) {
        channel.e_d = e_d;
        double max_dl = 0.0, max_dr = 0.0;
        for (int i = 0; i < grid; ++i) {
            for (int j = 0; j < grid; ++j) {
                const double w_a = max_intensity * double(i) / double(grid - 1);
                const double w_b = max_intensity * double(j) / double(grid - 1);
                const ClickProbs analytic = window_click_probs(w_a, w_b, channel);
                const ClickProbs oracle = fock::oracle_click_probs(w_a, w_b, channel, n_max);
                max_dl = std::max(max_dl, std::abs(analytic.s_l + inject_error - oracle.s_l));
                max_dr = std::max(max_dr, std::abs(analytic.s_r - oracle.s_r));
            }
        }
        std::printf("%-6g %-12.3e %-12.3e\n", e_d, max_dl, max_dr);
        if (max_dl > 1e-9 || max_dr > 1e-9) pass = false;
    }
    std::cout << (pass ? "oracle-check: PASS" : "oracle-check: FAIL (deviation > 1e-9)") << "\n";
    return pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Side-channel-free QKD bounds, simulation and optimization"};
    app.require_subcommand(1);
    // global options may appear after the subcommand name
    app.fallthrough(true);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file")->envname("SCFQKD_CONFIG");

    double distance = -1.0;
    std::vector<std::string> mode_names;
    std::string out_path;
    std::uint64_t seed = 1;
    int workers = 1;
    double ed_override = -1.0;
    double n_windows_override = -1.0;

    auto* rate = app.add_subcommand("rate", "evaluate the key rate at one distance");
    rate->add_option("--distance", distance, "total distance in km");
    rate->add_option("--mode", mode_names, "modes: original, twcc, aopp")->delimiter(',');
    rate->add_option("--out", out_path, "CSV output path")->envname("SCFQKD_OUT");
    rate->add_option("--ed", ed_override, "misalignment override");

    auto* sweep = app.add_subcommand("sweep", "key rate vs distance, optimized per point");
    double d_min = 0.0, d_max = 200.0, step = 10.0;
    std::vector<double> nu_list;
    bool fixed_params = false;
    std::string plot_path;
    sweep->add_option("--d-min", d_min, "first distance (km)");
    sweep->add_option("--d-max", d_max, "last distance (km)");
    sweep->add_option("--step", step, "distance step (km)");
    sweep->add_option("--nu", nu_list, "weak-source intensity bounds")->delimiter(',');
    sweep->add_option("--mode", mode_names, "modes: original, twcc, aopp")->delimiter(',');
    sweep->add_option("--out", out_path, "CSV output path")->envname("SCFQKD_OUT");
    sweep->add_flag("--fixed-params", fixed_params, "use config p0, mu instead of optimizing");
    sweep->add_option("--workers", workers, "worker threads")->envname("SCFQKD_WORKERS");
    sweep->add_option("--ed", ed_override, "misalignment override");
    sweep->add_option("--emit-plot-script", plot_path, "write a matplotlib helper script");

    auto* optimize = app.add_subcommand("optimize", "maximize the key rate over (p0, mu)");
    double nu_opt = -1.0;
    optimize->add_option("--distance", distance, "total distance in km");
    optimize->add_option("--nu", nu_opt, "weak-source intensity bound");
    optimize->add_option("--mode", mode_names, "mode: original, twcc or aopp")->delimiter(',');
    optimize->add_option("--ed", ed_override, "misalignment override");

    auto* mc_cmd = app.add_subcommand("mc", "seeded Monte-Carlo run vs analytic expectations");
    mc_cmd->add_option("--n-windows", n_windows_override, "window count N");
    mc_cmd->add_option("--seed", seed, "simulation seed")->envname("SCFQKD_SEED");
    mc_cmd->add_option("--distance", distance, "total distance in km");
    mc_cmd->add_option("--workers", workers, "worker threads")->envname("SCFQKD_WORKERS");
    mc_cmd->add_option("--ed", ed_override, "misalignment override");

    auto* oracle = app.add_subcommand("oracle-check", "Fock brute force vs analytic channel");
    int grid = 10;
    double max_intensity = 1.0;
    std::vector<double> ed_list;
    int oracle_n_max = -1;
    double inject_error = 0.0;
    oracle->add_option("--grid", grid, "grid points per axis");
    oracle->add_option("--max-intensity", max_intensity, "largest intensity on the grid");
    oracle->add_option("--ed", ed_list, "misalignment values")->delimiter(',');
    oracle->add_option("--n-max", oracle_n_max, "Fock cutoff override");
    oracle->add_option("--inject-error", inject_error,
                       "test hook: perturb the analytic model by this amount");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (distance >= 0.0) cfg.channel.distance_km = distance;
        if (ed_override >= 0.0) cfg.channel.e_d = ed_override;
        if (n_windows_override >= 0.0) cfg.protocol.n_windows = n_windows_override;
        validate_config(cfg.protocol, cfg.channel);
        const std::vector<Mode> modes = parse_modes(mode_names);

        if (app.got_subcommand(rate)) return cmd_rate(cfg, modes, out_path);
        if (app.got_subcommand(sweep))
            return cmd_sweep(cfg, d_min, d_max, step, nu_list, modes, fixed_params, workers,
                             out_path, plot_path);
        if (app.got_subcommand(optimize)) {
            const double nu =
                nu_opt >= 0.0 ? nu_opt : 0.5 * (cfg.protocol.nu_upper_a + cfg.protocol.nu_upper_b);
            return cmd_optimize(cfg, nu, modes.front());
        }
        if (app.got_subcommand(mc_cmd)) return cmd_mc(cfg, seed, workers);
        if (app.got_subcommand(oracle)) {
            return cmd_oracle_check(cfg, grid, max_intensity, ed_list, oracle_n_max, inject_error);
        }
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const fock::TruncationError& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
