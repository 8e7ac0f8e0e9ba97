/*
 * Experiment driver: Monte-Carlo logical-error-rate estimation, threshold
 * extraction, cycle statistics, matching-oracle audits, and machine-readable
 * result output. Trials are embarrassingly parallel; workers receive
 * (seed, params) and return counts, and aggregation is order-independent so
 * results are byte-identical for any worker-pool size.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qecool/decoder.hpp"
#include "qecool/lattice.hpp"
#include "qecool/matcher.hpp"

namespace qecool {

struct ExperimentSpec {
    DecodeMode mode = DecodeMode::Batch3D;
    std::vector<int> distances{5, 7, 9};
    std::vector<double> p_values{0.005};
    int64_t trials = 0;  // 0 -> 1e5 for p >= 0.005, 1e6 below
    uint64_t master_seed = 1;
    double clock_hz = 2e9;
    double meas_interval_s = 1e-6;
    std::optional<int> rounds_override;     // noisy rounds; default d
    std::optional<int> reg_depth_override;  // online Reg size; default 7
    std::optional<int> th_v_override;       // online threshold; default 3
    int threads = 0;                // 0 -> hardware concurrency
    double time_budget_s = 0.0;     // 0 -> off; capping forfeits determinism

    void validate() const;
    int64_t trials_for(double p) const;
};

struct ResultRow {
    int d = 0;
    double p = 0.0;
    DecodeMode mode = DecodeMode::Batch3D;
    int64_t trials = 0;
    int64_t logical_failures = 0;     // includes decoder-incomplete trials
    int64_t incomplete_failures = 0;  // subset of the above, reported apart
    int64_t overflow_failures = 0;
    double p_l = 0.0;
    double p_l_lo = 0.0;  // Wilson 95% interval
    double p_l_hi = 0.0;
    uint64_t cycles_max = 0;
    double cycles_mean = 0.0;
    double cycles_std = 0.0;
    uint64_t matches_total = 0;
    uint64_t matches_dt3 = 0;  // matched pairs spanning >= 3 planes
    double vertical_span_fraction = 0.0;
};

// Lattice/decoder parameterization used for one (mode, d, p) point.
LatticeConfig lattice_config_for(DecodeMode mode, int d, double p,
                                 std::optional<int> rounds_override = {});
DecoderConfig decoder_config_for(const ExperimentSpec& spec, int d,
                                 const LatticeConfig& lattice_cfg);

// Deterministic per-trial seed; independent of trial execution order.
uint64_t derive_trial_seed(uint64_t master_seed, DecodeMode mode, int d, double p,
                           int64_t trial);

struct TrialOutcome {
    DecodeStatus status = DecodeStatus::Ok;
    bool logical_failure = false;
    DecodeResult decode;
    std::vector<uint8_t> residual;
    std::vector<Event> events;  // detection events fed to the decoder
};

// One end-to-end trial: sample -> measure -> decode -> correct -> classify.
TrialOutcome run_single_trial(const Lattice& lattice, const DecoderConfig& cfg,
                              uint64_t seed, TraceSink trace = nullptr);

std::vector<ResultRow> run_monte_carlo(const ExperimentSpec& spec);

struct ThresholdEstimate {
    bool found = false;
    double p_th = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> crossings;  // one or more per distance pair
};

// Fits ln p_L vs ln p per distance (piecewise linear) and reports the median
// and spread of all pairwise curve crossings. Requires rows covering at least
// two distances and three p values.
ThresholdEstimate threshold_estimate(std::span<const ResultRow> rows);

struct OracleReport {
    int64_t trials = 0;
    int64_t compared = 0;
    int64_t skipped_overflow = 0;  // instances beyond the exact-matcher bound
    int64_t trials_with_weight = 0;
    double mean_weight_ratio = 0.0;  // decoder weight / exact weight
    int64_t ratio_below_one = 0;     // must stay 0: the oracle is optimal
    int64_t uncleared_trials = 0;    // must stay 0 with a perfect final round
    int64_t decoder_weight_total = 0;
    int64_t exact_weight_total = 0;
};

// Per-trial comparison of decoder matching weight against the exact oracle,
// plus the syndrome-clearing audit.
OracleReport oracle_check(const ExperimentSpec& spec);

// Synthetic instance of well-separated event pairs (pair weight <= 2, far
// from both boundaries and from each other); the decoder must reproduce the
// oracle's weight exactly on these.
std::vector<Event> make_isolated_pair_events(int d, int layers, int n_pairs,
                                             Xoshiro256pp& rng);

// Builds a syndrome history holding exactly the given detection events.
SyndromeHistory syndromes_from_events(const LatticeConfig& cfg, std::span<const Event> events);

std::vector<Event> collect_events(const SyndromeHistory& syndromes, int cols);

double wilson_lower(int64_t failures, int64_t trials);
double wilson_upper(int64_t failures, int64_t trials);

// CSV columns: d,p,mode,trials,logical_failures,overflow_failures,p_l,
// p_l_lo,p_l_hi,cycles_max,cycles_mean,cycles_std
std::string to_csv(std::span<const ResultRow> rows);
std::string to_json(std::span<const ResultRow> rows, const ExperimentSpec& spec);

}  // namespace qecool
