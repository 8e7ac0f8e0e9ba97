/*
 * Experiment driver CLI: Monte-Carlo logical-error-rate runs, threshold
 * extraction, cycle statistics, matching-oracle audits, hardware reports,
 * and a per-cycle message trace.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qecool/experiment.hpp"
#include "qecool/hardware.hpp"

using namespace qecool;

namespace {

struct Options {
    std::vector<int> distances{5};
    std::vector<double> p_values{0.01};
    std::string mode = "batch";
    int64_t trials = 0;
    uint64_t seed = 1;
    double clock_hz = 2e9;
    double meas_interval_ns = 1000.0;
    int reg_depth = 0;  // 0 = mode default
    int th_v = -2;      // -2 = mode default
    int rounds = 0;     // 0 = mode default (d noisy rounds)
    int threads = 0;
    double time_budget_s = 0.0;
    std::string format = "csv";
    std::string out;

    // hardware subcommand
    double budget_w = 1.0;
    std::string cell_lib;
    std::string bom;
};

DecodeMode parse_mode(const std::string& mode) {
    if (mode == "2d") return DecodeMode::TwoD;
    if (mode == "batch") return DecodeMode::Batch3D;
    if (mode == "online") return DecodeMode::Online3D;
    throw CLI::ValidationError("--mode", "expected one of 2d|batch|online");
}

ExperimentSpec build_spec(const Options& opt) {
    ExperimentSpec spec;
    spec.mode = parse_mode(opt.mode);
    spec.distances = opt.distances;
    spec.p_values = opt.p_values;
    spec.trials = opt.trials;
    spec.master_seed = opt.seed;
    spec.clock_hz = opt.clock_hz;
    spec.meas_interval_s = opt.meas_interval_ns * 1e-9;
    if (opt.reg_depth > 0) spec.reg_depth_override = opt.reg_depth;
    if (opt.th_v >= -1) spec.th_v_override = opt.th_v;
    if (opt.rounds > 0) spec.rounds_override = opt.rounds;
    spec.threads = opt.threads;
    spec.time_budget_s = opt.time_budget_s;
    spec.validate();
    return spec;
}

void write_output(const std::string& content, const std::string& out) {
    if (out.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + out);
    file << content;
}

std::string vertical_span_csv(std::span<const ResultRow> rows) {
    std::string out = "d,p,mode,trials,matches_total,matches_dt3,vertical_span_fraction\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.10g,%s,%lld,%llu,%llu,%.10g\n", r.d, r.p,
                      to_string(r.mode).c_str(), (long long)r.trials,
                      (unsigned long long)r.matches_total, (unsigned long long)r.matches_dt3,
                      r.vertical_span_fraction);
        out += buf;
    }
    return out;
}

int run_simulate(const Options& opt) {
    const ExperimentSpec spec = build_spec(opt);
    const auto rows = run_monte_carlo(spec);
    write_output(opt.format == "json" ? to_json(rows, spec) : to_csv(rows), opt.out);
    return 0;
}

int run_threshold(const Options& opt) {
    const ExperimentSpec spec = build_spec(opt);
    const auto rows = run_monte_carlo(spec);
    const ThresholdEstimate est = threshold_estimate(rows);
    if (opt.format == "json") {
        nlohmann::json doc = nlohmann::json::parse(to_json(rows, spec));
        doc["threshold"] = {{"found", est.found},
                            {"p_th", est.p_th},
                            {"lo", est.lo},
                            {"hi", est.hi},
                            {"crossings", est.crossings}};
        write_output(doc.dump(2) + "\n", opt.out);
    } else {
        write_output(to_csv(rows), opt.out);
        if (est.found)
            std::fprintf(stderr, "p_th = %.6g  (pairwise crossings in [%.6g, %.6g], n=%zu)\n",
                         est.p_th, est.lo, est.hi, est.crossings.size());
        else
            std::fprintf(stderr, "no crossing found in the sampled p range\n");
    }
    return est.found ? 0 : 2;
}

int run_cycles(Options opt, bool mode_given) {
    if (!mode_given) opt.mode = "online";
    if (opt.mode != "online")
        throw CLI::ValidationError("--mode", "cycle statistics require online mode");
    const ExperimentSpec spec = build_spec(opt);
    const auto rows = run_monte_carlo(spec);
    write_output(opt.format == "json" ? to_json(rows, spec) : to_csv(rows), opt.out);
    return 0;
}

int run_vertical_span(const Options& opt) {
    const ExperimentSpec spec = build_spec(opt);
    const auto rows = run_monte_carlo(spec);
    write_output(opt.format == "json" ? to_json(rows, spec) : vertical_span_csv(rows), opt.out);
    return 0;
}

int run_oracle_check(const Options& opt) {
    Options local = opt;
    if (local.trials == 0) local.trials = 1000;
    const ExperimentSpec spec = build_spec(local);
    const OracleReport report = oracle_check(spec);
    nlohmann::json doc;
    doc["trials"] = report.trials;
    doc["compared"] = report.compared;
    doc["skipped_overflow"] = report.skipped_overflow;
    doc["mean_weight_ratio"] = report.mean_weight_ratio;
    doc["ratio_below_one"] = report.ratio_below_one;
    doc["uncleared_trials"] = report.uncleared_trials;
    doc["decoder_weight_total"] = report.decoder_weight_total;
    doc["exact_weight_total"] = report.exact_weight_total;
    doc["syndrome_clearing_rate"] =
        report.trials > 0
            ? double(report.trials - report.uncleared_trials) / double(report.trials)
            : 1.0;
    if (opt.format == "json" || !opt.out.empty()) {
        write_output(doc.dump(2) + "\n", opt.out);
    } else {
        std::printf("trials:               %lld\n", (long long)report.trials);
        std::printf("compared vs oracle:   %lld (skipped %lld oversized)\n",
                    (long long)report.compared, (long long)report.skipped_overflow);
        std::printf("mean weight ratio:    %.4f\n", report.mean_weight_ratio);
        std::printf("ratio below one:      %lld\n", (long long)report.ratio_below_one);
        std::printf("uncleared syndromes:  %lld\n", (long long)report.uncleared_trials);
    }
    return report.ratio_below_one == 0 && report.uncleared_trials == 0 ? 0 : 2;
}

int run_hardware(const Options& opt) {
    const std::vector<CellSpec> library =
        opt.cell_lib.empty() ? default_cell_library() : load_cell_library_file(opt.cell_lib);

    UnitBudget unit = published_unit_budget();
    if (!opt.bom.empty()) {
        std::vector<std::pair<std::string, int>> counts;
        std::stringstream ss(opt.bom);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw CLI::ValidationError("--bom", "expected name=count[,name=count...]");
            counts.emplace_back(item.substr(0, eq), std::stoi(item.substr(eq + 1)));
        }
        unit = aggregate_bom(counts, library);
    }

    PowerParams params;
    params.freq_hz = opt.clock_hz;
    params.budget_w = opt.budget_w;
    const int d = opt.distances.front();
    const double rsfq = rsfq_power_w(unit, params);
    const double ersfq = ersfq_power_w(unit, params);
    const double fmax = max_frequency_hz(unit);
    const int64_t capacity = protectable_qubits(d, ersfq, params.budget_w);

    if (opt.format == "json") {
        nlohmann::json doc;
        doc["d"] = d;
        doc["freq_hz"] = params.freq_hz;
        doc["budget_w"] = params.budget_w;
        doc["unit"] = {{"jjs", unit.total_jjs},
                       {"bias_ma", unit.total_bias_ma},
                       {"area_mm2", unit.total_area_mm2},
                       {"critical_path_ps", unit.critical_path_ps}};
        doc["rsfq_power_w"] = rsfq;
        doc["ersfq_power_w"] = ersfq;
        doc["max_frequency_hz"] = fmax;
        doc["units_per_logical"] = int64_t(2) * d * (d - 1);
        doc["protectable_qubits"] = capacity;
        write_output(doc.dump(2) + "\n", opt.out);
        return 0;
    }
    std::string text;
    char buf[256];
    std::snprintf(buf, sizeof buf, "unit: %lld JJs, %.3f mA, %.3f mm2, %.0f ps\n",
                  (long long)unit.total_jjs, unit.total_bias_ma, unit.total_area_mm2,
                  unit.critical_path_ps);
    text += buf;
    std::snprintf(buf, sizeof buf, "rsfq power:         %.3f uW/unit\n", rsfq * 1e6);
    text += buf;
    std::snprintf(buf, sizeof buf, "ersfq power @%.2g Hz: %.3f uW/unit\n", params.freq_hz,
                  ersfq * 1e6);
    text += buf;
    std::snprintf(buf, sizeof buf, "max frequency:      %.3f GHz\n", fmax * 1e-9);
    text += buf;
    std::snprintf(buf, sizeof buf, "units per logical (d=%d): %lld\n", d,
                  (long long)(int64_t(2) * d * (d - 1)));
    text += buf;
    std::snprintf(buf, sizeof buf, "protectable qubits @%.2g W: %lld\n", params.budget_w,
                  (long long)capacity);
    text += buf;
    write_output(text, opt.out);
    return 0;
}

int run_trace(const Options& opt) {
    const ExperimentSpec spec = build_spec(opt);
    const int d = spec.distances.front();
    const double p = spec.p_values.front();
    const LatticeConfig lat_cfg = lattice_config_for(spec.mode, d, p, spec.rounds_override);
    const Lattice lattice(lat_cfg);
    const DecoderConfig dcfg = decoder_config_for(spec, d, lat_cfg);

    std::string log;
    TraceSink sink = [&](const TraceEvent& ev) { log += to_string(ev) + "\n"; };
    const uint64_t seed = derive_trial_seed(spec.master_seed, spec.mode, d, p, 0);
    const TrialOutcome trial = run_single_trial(lattice, dcfg, seed, sink);

    char buf[160];
    std::snprintf(buf, sizeof buf, "# trial d=%d p=%.10g mode=%s seed=%llu outcome=%s%s\n", d, p,
                  to_string(spec.mode).c_str(), (unsigned long long)seed,
                  trial.status == DecodeStatus::Ok
                      ? (trial.logical_failure ? "logical-failure" : "success")
                      : (trial.status == DecodeStatus::Overflow ? "overflow" : "incomplete"),
                  "");
    write_output(std::string(buf) + log, opt.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spike-based surface-code grid decoder: simulator and hardware model"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file mirroring the flags; flags override");

    Options opt;
    app.add_option("--d", opt.distances, "code distance(s), odd and >= 3")->capture_default_str();
    app.add_option("--p", opt.p_values, "physical error rate(s)")->capture_default_str();
    auto* mode_opt =
        app.add_option("--mode", opt.mode, "decode mode: 2d|batch|online")->capture_default_str();
    app.add_option("--trials", opt.trials, "trials per (d,p) point; 0 = built-in default");
    app.add_option("--seed", opt.seed, "master seed")->capture_default_str();
    app.add_option("--clock-hz", opt.clock_hz, "decoder clock frequency")->capture_default_str();
    app.add_option("--meas-interval-ns", opt.meas_interval_ns, "measurement period in ns")
        ->capture_default_str();
    app.add_option("--reg-depth", opt.reg_depth, "online Reg capacity override");
    app.add_option("--th-v", opt.th_v, "online vertical threshold override");
    app.add_option("--rounds", opt.rounds, "noisy measurement rounds per trial (default d)");
    app.add_option("--threads", opt.threads, "worker threads; 0 = hardware concurrency");
    app.add_option("--time-budget-s", opt.time_budget_s,
                   "wall-clock cap per point; breaks reproducibility when it triggers");
    app.add_option("--format", opt.format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--out", opt.out, "output file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo logical error rates");
    auto* threshold = app.add_subcommand("threshold", "estimate the p_L crossing point");
    auto* cycles = app.add_subcommand("cycles", "per-layer execution-cycle statistics (online)");
    auto* vspan =
        app.add_subcommand("vertical-span", "fraction of matchings spanning >= 3 planes");
    auto* oracle = app.add_subcommand("oracle-check", "decoder matching weight vs exact oracle");
    auto* hardware = app.add_subcommand("hardware", "SFQ power, frequency and capacity report");
    auto* trace = app.add_subcommand("trace", "per-cycle message log of a single trial");

    hardware->add_option("--budget-w", opt.budget_w, "refrigerator power budget in W")
        ->capture_default_str();
    hardware->add_option("--cell-lib", opt.cell_lib, "cell library table file");
    hardware->add_option("--bom", opt.bom, "cell counts, e.g. splitter=12,dro=40");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(opt);
        if (threshold->parsed()) return run_threshold(opt);
        if (cycles->parsed()) return run_cycles(opt, mode_opt->count() > 0);
        if (vspan->parsed()) return run_vertical_span(opt);
        if (oracle->parsed()) return run_oracle_check(opt);
        if (hardware->parsed()) return run_hardware(opt);
        if (trace->parsed()) return run_trace(opt);
    } catch (const CLI::Error& err) {
        return app.exit(err);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
