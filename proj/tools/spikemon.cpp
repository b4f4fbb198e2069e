// spikemon: detect the emergence of a rank-one spike in a stream of noisy
// symmetric matrices. Subcommands cover critical-value simulation, stream
// monitoring, synthetic data generation, Monte-Carlo size/power studies and
// panel-data ingestion.
//
// Exit codes: 0 success / no alarm, 1 I/O or data error, 2 usage error,
// 3 alarm raised, 4 degenerate normalizer (constant training eigenvalues).

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spikemon/detector.hpp"
#include "spikemon/eigensolve.hpp"
#include "spikemon/errors.hpp"
#include "spikemon/experiments.hpp"
#include "spikemon/ingest.hpp"
#include "spikemon/matrix_stream.hpp"
#include "spikemon/quantiles.hpp"
#include "spikemon/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAlarm = 3;
constexpr int kExitDegenerate = 4;

bool g_verbose = false;

void note(const std::string& msg) {
    if (g_verbose) std::cerr << "spikemon: " << msg << "\n";
}

spikemon::SignalLaw parse_law(const std::string& name) {
    if (name == "uniform01" || name == "uniform") return spikemon::SignalLaw::uniform01;
    if (name == "beta24" || name == "beta") return spikemon::SignalLaw::beta24;
    if (name == "table" || name == "custom_table") return spikemon::SignalLaw::custom_table;
    throw std::invalid_argument("unknown law '" + name +
                                "' (expected uniform01, beta24 or table)");
}

// "value:prob,value:prob,..." -> atoms of a discrete signal law.
std::vector<std::pair<double, double>> parse_table_atoms(const std::string& text) {
    std::vector<std::pair<double, double>> atoms;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(start, end - start);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("table atom '" + item + "' is not value:prob");
        try {
            atoms.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw std::invalid_argument("table atom '" + item + "' is not value:prob");
        }
        start = end + 1;
    }
    return atoms;
}

// Threshold source used by monitor/experiment: explicit value, else cached
// table rows, else a fresh simulation that is written back into the cache.
struct ThresholdConfig {
    std::optional<double> explicit_threshold;
    std::string table_path = "quantiles.csv";
    int sim_m = 500;
    int sim_T = 500;
    int sim_reps = 10000;
    std::uint64_t sim_seed = 0;
    int threads = 0;
};

// plain_names also exposes --m/--T/--reps for the simulation parameters;
// only safe on subcommands where those names are not already taken.
void add_threshold_flags(CLI::App* cmd, ThresholdConfig& cfg, bool plain_names = false) {
    cmd->add_option("--threshold", cfg.explicit_threshold,
                    "Explicit alarm threshold (skips the quantile table)");
    cmd->add_option("--quantile-table", cfg.table_path, "Quantile cache CSV path")
        ->envname("SPIKE_QTABLE")
        ->capture_default_str();
    cmd->add_option(plain_names ? "--sim-m,--m" : "--sim-m", cfg.sim_m,
                    "m for on-demand quantile simulation")
        ->capture_default_str();
    cmd->add_option(plain_names ? "--sim-T,--T" : "--sim-T", cfg.sim_T,
                    "T for on-demand quantile simulation")
        ->capture_default_str();
    cmd->add_option(plain_names ? "--sim-reps,--reps" : "--sim-reps", cfg.sim_reps,
                    "Replications for on-demand quantile simulation")
        ->capture_default_str();
    cmd->add_option("--sim-seed", cfg.sim_seed, "Seed for on-demand quantile simulation")
        ->capture_default_str();
}

spikemon::QuantileTable load_table_if_present(const std::string& path) {
    if (path.empty() || !std::filesystem::exists(path)) return {};
    return spikemon::read_quantile_table(path);
}

// Ensure the cache holds a usable row for every alpha; simulate the missing
// ones in a single pass and persist the updated table.
spikemon::QuantileTable ensure_thresholds(const ThresholdConfig& cfg,
                                          const std::vector<double>& alphas) {
    spikemon::QuantileTable table = load_table_if_present(cfg.table_path);
    if (cfg.explicit_threshold) return table;

    std::vector<double> missing;
    for (double a : alphas)
        if (!table.best_for_alpha(a)) missing.push_back(a);
    if (missing.empty()) return table;

    spikemon::QuantileRequest req;
    req.m = cfg.sim_m;
    req.T = cfg.sim_T;
    req.alphas = missing;
    req.replications = cfg.sim_reps;
    req.seed = cfg.sim_seed;
    note("simulating " + std::to_string(missing.size()) + " quantile(s) at m=" +
         std::to_string(req.m) + " T=" + std::to_string(req.T) +
         " reps=" + std::to_string(req.replications));
    const spikemon::QuantileTable fresh = spikemon::quantiles_of_L(req, cfg.threads);
    for (const auto& row : fresh.rows) table.upsert(row);
    if (!cfg.table_path.empty()) spikemon::write_quantile_table(table, cfg.table_path);
    return table;
}

std::vector<double> eigenvalues_of_stream(const std::vector<spikemon::SymMatrix>& stream) {
    const spikemon::EigenOptions opts;
    std::vector<double> lambdas;
    lambdas.reserve(stream.size());
    for (const auto& m : stream) lambdas.push_back(spikemon::largest_eigenvalue(m, opts));
    return lambdas;
}

int cmd_quantiles(const spikemon::QuantileRequest& req, const std::string& table_path,
                  int threads) {
    req.validate();
    spikemon::QuantileTable table = load_table_if_present(table_path);

    std::vector<double> missing;
    for (double a : req.alphas)
        if (!table.find(req.m, req.T, a, req.replications, req.seed)) missing.push_back(a);

    if (!missing.empty()) {
        spikemon::QuantileRequest todo = req;
        todo.alphas = missing;
        note("simulating " + std::to_string(missing.size()) + " quantile(s)");
        const spikemon::QuantileTable fresh = spikemon::quantiles_of_L(todo, threads);
        for (const auto& row : fresh.rows) table.upsert(row);
        if (!table_path.empty()) spikemon::write_quantile_table(table, table_path);
    }

    // Print exactly the requested rows, in table-file format.
    spikemon::QuantileTable out;
    for (double a : req.alphas) {
        const auto* row = table.find(req.m, req.T, a, req.replications, req.seed);
        if (row) out.upsert(*row);
    }
    spikemon::write_quantile_table(out, std::cout);
    return kExitOk;
}

struct MonitorArgs {
    std::string train_path;
    std::string stream_path;
    double alpha = 0.05;
    ThresholdConfig thresholds;
    std::string trace_path;
    std::optional<int> max_k;
    bool continue_after_alarm = false;
};

int cmd_monitor(const MonitorArgs& args) {
    if (!(args.alpha > 0.0 && args.alpha < 1.0))
        throw std::invalid_argument("--alpha must lie in (0, 1)");

    const auto train_stream = spikemon::read_matrix_stream(args.train_path);
    const auto mon_stream = spikemon::read_matrix_stream(args.stream_path);
    if (train_stream.front().dim() != mon_stream.front().dim())
        throw std::invalid_argument("training and monitoring matrices have different dimensions");
    if (train_stream.size() < 2)
        throw std::invalid_argument("training stream needs at least 2 matrices");

    double threshold;
    std::string threshold_desc;
    if (args.thresholds.explicit_threshold) {
        threshold = *args.thresholds.explicit_threshold;
        threshold_desc = "explicit";
    } else {
        const auto table = ensure_thresholds(args.thresholds, {args.alpha});
        const auto* row = table.best_for_alpha(args.alpha);
        if (!row)
            throw std::runtime_error("no quantile available for alpha=" +
                                     std::to_string(args.alpha));
        threshold = row->quantile;
        threshold_desc = "simulated at m=" + std::to_string(row->m) +
                         " T=" + std::to_string(row->T) +
                         " reps=" + std::to_string(row->replications) +
                         " seed=" + std::to_string(row->seed);
    }

    note("computing training eigenvalues (" + std::to_string(train_stream.size()) + ")");
    spikemon::EigenSeries train;
    train.n = train_stream.front().dim();
    train.m = static_cast<int>(train_stream.size());
    train.lambdas = eigenvalues_of_stream(train_stream);
    note("computing monitoring eigenvalues (" + std::to_string(mon_stream.size()) + ")");
    const std::vector<double> mon = eigenvalues_of_stream(mon_stream);

    const auto verdict =
        spikemon::monitor(train, mon, threshold, args.max_k, args.continue_after_alarm);

    if (!args.trace_path.empty()) {
        std::ofstream out(args.trace_path);
        if (!out) throw spikemon::IoError("cannot open " + args.trace_path + " for writing");
        out << "k,gamma\n";
        char buf[64];
        for (const auto& [k, g] : verdict.gamma_trace) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), g);
            (void)ec;
            out << k << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << "\n";
        }
        if (!out) throw spikemon::IoError("write failure on " + args.trace_path);
    }

    std::cout << "training: m=" << train.m << " matrices, n=" << train.n << "\n";
    std::cout << "threshold: " << threshold << " (alpha=" << args.alpha << ", " << threshold_desc
              << ")\n";
    if (verdict.alarmed) {
        std::cout << "alarm at k=" << *verdict.k_hat << " (observation "
                  << train.m + *verdict.k_hat << ")\n";
        return kExitAlarm;
    }
    std::cout << "no alarm after " << verdict.gamma_trace.size() << " monitoring observations\n";
    return kExitOk;
}

struct SynthArgs {
    int n = 0;
    int m = 0;
    int len = 0;
    std::string law = "uniform01";
    std::string table_atoms;
    std::string regime = "sub";
    std::optional<double> delta;
    int kstar = 0;
    std::uint64_t seed = 0;
    int burn_in = 50;
    double phi_lo = -0.5;
    double phi_hi = 0.5;
    std::string out_path;
};

int cmd_synth(const SynthArgs& args) {
    spikemon::WignerStreamSpec wspec;
    wspec.n = args.n;
    wspec.phi_seed = args.seed;
    wspec.noise_seed = args.seed;
    wspec.burn_in = args.burn_in;
    wspec.phi_lo = args.phi_lo;
    wspec.phi_hi = args.phi_hi;

    spikemon::SignalSpec sspec;
    sspec.law = parse_law(args.law);
    if (!args.table_atoms.empty()) sspec.table = parse_table_atoms(args.table_atoms);
    if (args.regime == "super") {
        if (!args.delta) throw std::invalid_argument("--regime super requires --delta");
        sspec.delta = args.delta;
        sspec.kstar = args.kstar;
    } else if (args.regime == "sub") {
        if (args.delta) throw std::invalid_argument("--delta only applies to --regime super");
    } else {
        throw std::invalid_argument("--regime must be sub or super");
    }

    note("generating " + std::to_string(args.len) + " matrices at n=" + std::to_string(args.n));
    const auto stream = spikemon::gen_stream(wspec, sspec, args.m, args.len);
    spikemon::write_matrix_stream(stream, args.out_path);
    std::cout << "wrote " << stream.size() << " matrices (n=" << args.n << ") to "
              << args.out_path << "\n";
    return kExitOk;
}

struct ExperimentArgs {
    spikemon::ExperimentPlan plan;
    std::string law = "uniform01";
    std::string table_atoms;
    ThresholdConfig thresholds;
    std::string out_path;
};

int cmd_experiment(ExperimentArgs& args, bool power) {
    args.plan.law = parse_law(args.law);
    if (!args.table_atoms.empty()) args.plan.table = parse_table_atoms(args.table_atoms);
    args.plan.threshold_override = args.thresholds.explicit_threshold;
    args.plan.validate(power);

    args.thresholds.threads = args.plan.threads;
    const auto table = ensure_thresholds(args.thresholds, args.plan.alphas);
    const auto rows = power ? spikemon::run_power(args.plan, table)
                            : spikemon::run_pfa(args.plan, table);

    spikemon::write_results_csv(rows, std::cout);
    if (!args.out_path.empty()) spikemon::write_results_csv(rows, args.out_path);
    return kExitOk;
}

struct IngestArgs {
    std::string history_path;
    std::string series_path;
    std::string stream_path;
    int period = 365;
    int window = 30;
    int baseline_len = 0;
    bool interpolate = false;
    std::string out_path;
};

spikemon::PanelSeries load_panel(const std::string& path, bool interpolate) {
    spikemon::PanelSeries p = spikemon::read_panel_csv(path);
    p = spikemon::drop_leap_days(p);
    if (interpolate && p.has_missing()) p = spikemon::interpolate_missing(p);
    return p;
}

int emit_panel(const spikemon::PanelSeries& panel, const std::string& out_path) {
    if (out_path.empty()) {
        spikemon::write_panel_csv(panel, std::cout);
    } else {
        spikemon::write_panel_csv(panel, out_path);
        std::cout << "wrote " << panel.days.size() << " days x " << panel.locations.size()
                  << " locations to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_ingest_deseasonalize(const IngestArgs& args) {
    const auto history = load_panel(args.history_path, args.interpolate);
    const auto series = load_panel(args.series_path, args.interpolate);
    const auto model = spikemon::fit_seasonal(history, args.period, args.window);
    return emit_panel(spikemon::deseasonalize(series, model), args.out_path);
}

int cmd_ingest_matrices(const IngestArgs& args) {
    const auto history = load_panel(args.history_path, args.interpolate);
    const auto series = load_panel(args.series_path, args.interpolate);
    const auto model = spikemon::fit_seasonal(history, args.period, args.window);
    const auto v = spikemon::deseasonalize(series, model);
    const auto stream = spikemon::outer_product_stream(v);
    if (args.out_path.empty())
        throw std::invalid_argument("ingest matrices requires --out for the matrix stream");
    spikemon::write_matrix_stream(stream, args.out_path);
    std::cout << "wrote " << stream.size() << " matrices (n=" << v.locations.size() << ") to "
              << args.out_path << "\n";
    return kExitOk;
}

int cmd_ingest_center(const IngestArgs& args) {
    const auto stream = spikemon::read_matrix_stream(args.stream_path);
    const auto centered = spikemon::center_by_baseline(stream, args.baseline_len);
    if (args.out_path.empty())
        throw std::invalid_argument("ingest center requires --out for the matrix stream");
    spikemon::write_matrix_stream(centered, args.out_path);
    std::cout << "wrote " << centered.size() << " centered matrices to " << args.out_path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming detector for the emergence of a rank-one spike in noisy "
                 "symmetric matrix observations"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");
    app.add_flag("--verbose", g_verbose, "Progress notes on stderr");

    // ---- quantiles ----
    spikemon::QuantileRequest qreq;
    std::string qtable_path = "quantiles.csv";
    int qthreads = 0;
    auto* q = app.add_subcommand("quantiles", "Simulate critical values of the null limit");
    q->add_option("--m", qreq.m, "Training length of the limit statistic")->capture_default_str();
    q->add_option("--T", qreq.T, "Monitoring horizon of the limit statistic")
        ->capture_default_str();
    q->add_option("--reps", qreq.replications, "Monte-Carlo replications")->capture_default_str();
    q->add_option("--alpha", qreq.alphas, "Significance levels (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    q->add_option("--seed", qreq.seed, "RNG seed")->envname("SPIKE_SEED")->capture_default_str();
    q->add_option("--threads", qthreads, "Worker threads (0 = all cores)")
        ->envname("SPIKE_THREADS")
        ->capture_default_str();
    q->add_option("--table", qtable_path, "Quantile cache CSV path")
        ->envname("SPIKE_QTABLE")
        ->capture_default_str();

    // ---- monitor ----
    MonitorArgs margs;
    auto* mon = app.add_subcommand("monitor", "Run the detector over a matrix stream");
    mon->add_option("--train", margs.train_path, "Training matrix-stream CSV")->required();
    mon->add_option("--stream", margs.stream_path, "Monitoring matrix-stream CSV")->required();
    mon->add_option("--alpha", margs.alpha, "Significance level")->capture_default_str();
    mon->add_option("--trace", margs.trace_path, "Write the gamma trace CSV here");
    mon->add_option("--max-k", margs.max_k, "Stop after this many monitoring observations");
    mon->add_flag("--continue-after-alarm", margs.continue_after_alarm,
                  "Keep tracing after the first alarm");
    add_threshold_flags(mon, margs.thresholds, /*plain_names=*/true);
    mon->add_option("--threads", margs.thresholds.threads, "Worker threads (0 = all cores)")
        ->envname("SPIKE_THREADS")
        ->capture_default_str();
    mon->add_option("--seed", margs.thresholds.sim_seed,
                    "Seed for on-demand quantile simulation")
        ->envname("SPIKE_SEED");

    // ---- synth ----
    SynthArgs sargs;
    auto* sy = app.add_subcommand("synth", "Generate a synthetic spiked-matrix stream");
    sy->add_option("--n", sargs.n, "Matrix dimension")->required();
    sy->add_option("--m", sargs.m, "Training length (change offsets count from here)")
        ->required();
    sy->add_option("--len", sargs.len, "Total stream length")->required();
    sy->add_option("--law", sargs.law, "Signal law: uniform01|beta24|table")
        ->capture_default_str();
    sy->add_option("--table", sargs.table_atoms, "Discrete law atoms value:prob,value:prob,...");
    sy->add_option("--regime", sargs.regime, "sub (no change) or super (change at m+kstar)")
        ->capture_default_str();
    sy->add_option("--delta", sargs.delta, "Supercritical margin: s in (1, 1+delta]");
    sy->add_option("--kstar", sargs.kstar, "Change offset after training")->capture_default_str();
    sy->add_option("--seed", sargs.seed, "RNG seed")->envname("SPIKE_SEED")->capture_default_str();
    sy->add_option("--burn-in", sargs.burn_in, "Discarded noise-chain steps")
        ->capture_default_str();
    sy->add_option("--phi-lo", sargs.phi_lo, "Lower AR-coefficient bound")->capture_default_str();
    sy->add_option("--phi-hi", sargs.phi_hi, "Upper AR-coefficient bound")->capture_default_str();
    sy->add_option("--out", sargs.out_path, "Output matrix-stream CSV")->required();

    // ---- experiment pfa|power ----
    ExperimentArgs eargs;
    auto* ex = app.add_subcommand("experiment", "Monte-Carlo size/power studies");
    ex->require_subcommand(1);
    auto add_experiment_flags = [&](CLI::App* cmd) {
        cmd->add_option("--m", eargs.plan.m_grid, "Training lengths (comma separated)")
            ->delimiter(',')
            ->required();
        cmd->add_option("--n", eargs.plan.n_grid, "Matrix dimensions (comma separated)")
            ->delimiter(',')
            ->required();
        cmd->add_option("--alpha", eargs.plan.alphas, "Significance levels (comma separated)")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--law", eargs.law, "Signal law: uniform01|beta24|table")
            ->capture_default_str();
        cmd->add_option("--table", eargs.table_atoms,
                        "Discrete law atoms value:prob,value:prob,...");
        cmd->add_option("--reps", eargs.plan.replications, "Replications per cell")
            ->capture_default_str();
        cmd->add_option("--horizon-mult", eargs.plan.horizon_mult,
                        "Monitoring horizon in multiples of m")
            ->capture_default_str();
        cmd->add_option("--burn-in", eargs.plan.burn_in, "Discarded noise-chain steps")
            ->capture_default_str();
        cmd->add_option("--seed", eargs.plan.seed, "RNG seed")
            ->envname("SPIKE_SEED")
            ->capture_default_str();
        cmd->add_option("--threads", eargs.plan.threads, "Worker threads (0 = all cores)")
            ->envname("SPIKE_THREADS")
            ->capture_default_str();
        cmd->add_option("--out", eargs.out_path, "Also write the results CSV here");
        add_threshold_flags(cmd, eargs.thresholds);
    };
    auto* pfa = ex->add_subcommand("pfa", "False-alarm rate on pure subcritical streams");
    add_experiment_flags(pfa);
    auto* pow = ex->add_subcommand("power", "Detection rate with a supercritical change");
    add_experiment_flags(pow);
    pow->add_option("--delta", eargs.plan.delta_grid, "Supercritical margins (comma separated)")
        ->delimiter(',')
        ->required();
    pow->add_option("--kstar", eargs.plan.kstar_grid, "Change offsets (comma separated)")
        ->delimiter(',')
        ->required();

    // ---- ingest deseasonalize|matrices|center ----
    IngestArgs iargs;
    auto* ing = app.add_subcommand("ingest", "Panel/sensor data to matrix streams");
    ing->require_subcommand(1);
    auto* des = ing->add_subcommand("deseasonalize",
                                    "Subtract a smoothed per-calendar-day profile");
    auto* mat = ing->add_subcommand("matrices",
                                    "Deseasonalize and emit outer-product matrices");
    for (CLI::App* cmd : {des, mat}) {
        cmd->add_option("--history", iargs.history_path, "Panel CSV used to fit the profile")
            ->required();
        cmd->add_option("--series", iargs.series_path, "Panel CSV to transform")->required();
        cmd->add_option("--period", iargs.period, "Profile length in days")
            ->capture_default_str();
        cmd->add_option("--window", iargs.window, "Centered circular moving-average window")
            ->capture_default_str();
        cmd->add_flag("--interpolate", iargs.interpolate,
                      "Fill interior missing values linearly in time");
    }
    des->add_option("--out", iargs.out_path, "Output panel CSV (stdout when omitted)");
    mat->add_option("--out", iargs.out_path, "Output matrix-stream CSV")->required();
    auto* cen = ing->add_subcommand("center", "Subtract the mean of a baseline prefix");
    cen->add_option("--stream", iargs.stream_path, "Input matrix-stream CSV")->required();
    cen->add_option("--baseline-len", iargs.baseline_len, "Baseline prefix length")->required();
    cen->add_option("--out", iargs.out_path, "Output matrix-stream CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (q->parsed()) return cmd_quantiles(qreq, qtable_path, qthreads);
        if (mon->parsed()) return cmd_monitor(margs);
        if (sy->parsed()) return cmd_synth(sargs);
        if (ex->parsed()) return cmd_experiment(eargs, pow->parsed());
        if (ing->parsed()) {
            if (des->parsed()) return cmd_ingest_deseasonalize(iargs);
            if (mat->parsed()) return cmd_ingest_matrices(iargs);
            if (cen->parsed()) return cmd_ingest_center(iargs);
        }
        std::cerr << "spikemon: no subcommand\n";
        return kExitUsage;
    } catch (const spikemon::DegenerateNormalizerError& e) {
        std::cerr << "spikemon: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const spikemon::ParseError& e) {
        std::cerr << "spikemon: " << e.what() << "\n";
        return kExitIo;
    } catch (const spikemon::IoError& e) {
        std::cerr << "spikemon: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "spikemon: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "spikemon: " << e.what() << "\n";
        return kExitIo;
    }
}
