#include "qecool/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace qecool {

void ExperimentSpec::validate() const {
    if (distances.empty()) throw std::invalid_argument("at least one code distance required");
    for (int d : distances)
        if (d < 3 || d % 2 == 0)
            throw std::invalid_argument("code distances must be odd and >= 3");
    if (p_values.empty()) throw std::invalid_argument("at least one p value required");
    for (double p : p_values)
        if (p < 0.0 || p >= 1.0) throw std::invalid_argument("p values must lie in [0, 1)");
    if (trials < 0) throw std::invalid_argument("trials must be >= 0");
    if (clock_hz <= 0.0) throw std::invalid_argument("clock_hz must be positive");
    if (meas_interval_s <= 0.0) throw std::invalid_argument("meas_interval_s must be positive");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    if (rounds_override && *rounds_override < 1)
        throw std::invalid_argument("rounds override must be >= 1");
}

int64_t ExperimentSpec::trials_for(double p) const {
    if (trials > 0) return trials;
    return p >= 0.005 ? 100000 : 1000000;
}

LatticeConfig lattice_config_for(DecodeMode mode, int d, double p,
                                 std::optional<int> rounds_override) {
    LatticeConfig cfg;
    cfg.d = d;
    if (mode == DecodeMode::TwoD) {
        // One perfect readout round; nothing to gain from the appended layer.
        cfg.n_rounds = rounds_override.value_or(1);
        cfg.p_data = p;
        cfg.p_meas = 0.0;
        cfg.final_round_perfect = false;
    } else {
        cfg.n_rounds = rounds_override.value_or(d);
        cfg.p_data = p;
        cfg.p_meas = p;
        cfg.final_round_perfect = true;
    }
    cfg.validate();
    return cfg;
}

DecoderConfig decoder_config_for(const ExperimentSpec& spec, int d,
                                 const LatticeConfig& lattice_cfg) {
    DecoderConfig cfg = make_decoder_config(spec.mode, d, lattice_cfg.total_rounds());
    if (spec.mode == DecodeMode::Online3D) {
        if (spec.reg_depth_override) {
            cfg.reg_depth = *spec.reg_depth_override;
            cfg.n_depth = cfg.reg_depth;
        }
        if (spec.th_v_override) cfg.th_v = *spec.th_v_override;
    }
    cfg.clock_hz = spec.clock_hz;
    cfg.meas_interval_s = spec.meas_interval_s;
    cfg.validate(d);
    return cfg;
}

uint64_t derive_trial_seed(uint64_t master_seed, DecodeMode mode, int d, double p,
                           int64_t trial) {
    uint64_t h = hash_combine(master_seed, uint64_t(mode) + 1);
    h = hash_combine(h, uint64_t(d));
    h = hash_combine(h, p);
    return hash_combine(h, uint64_t(trial));
}

TrialOutcome run_single_trial(const Lattice& lattice, const DecoderConfig& cfg, uint64_t seed,
                              TraceSink trace) {
    TrialOutcome out;
    const ErrorHistory errors = sample_errors(lattice, seed);
    const SyndromeHistory synd = measure_rounds(lattice, errors);
    out.events = collect_events(synd, lattice.cols());
    out.decode = decode_trial(synd, lattice.d(), cfg, std::move(trace));
    out.status = out.decode.status;
    if (out.status == DecodeStatus::Overflow) return out;

    const std::vector<uint8_t> final_error = cumulative_error(errors);
    out.residual = apply_correction(final_error, out.decode.corrections);
    if (out.status != DecodeStatus::Ok || !syndrome_is_clear(lattice, out.residual)) {
        out.status = DecodeStatus::Incomplete;
        return out;
    }
    out.logical_failure = logical_failure(lattice, out.residual);
    return out;
}

namespace {

struct PointAccum {
    int64_t trials = 0;
    int64_t logical = 0;
    int64_t incomplete = 0;
    int64_t overflow = 0;
    CycleStats cycles;
    uint64_t matches_total = 0;
    uint64_t matches_dt3 = 0;
    int64_t weight_total = 0;

    void add(const TrialOutcome& trial) {
        ++trials;
        switch (trial.status) {
            case DecodeStatus::Overflow: ++overflow; break;
            case DecodeStatus::Incomplete: ++incomplete; break;
            case DecodeStatus::Ok:
                if (trial.logical_failure) ++logical;
                break;
        }
        for (uint32_t c : trial.decode.layer_cycles) cycles.add(c);
        for (const auto& m : trial.decode.matches) {
            ++matches_total;
            if (m.dt() >= 3) ++matches_dt3;
            weight_total += m.weight;
        }
    }

    // Commutative integer merges keep aggregation order-independent.
    void merge(const PointAccum& other) {
        trials += other.trials;
        logical += other.logical;
        incomplete += other.incomplete;
        overflow += other.overflow;
        cycles.merge(other.cycles);
        matches_total += other.matches_total;
        matches_dt3 += other.matches_dt3;
        weight_total += other.weight_total;
    }
};

PointAccum run_point(const ExperimentSpec& spec, const Lattice& lattice,
                     const DecoderConfig& cfg, double p, int64_t trials) {
    const int threads = spec.threads > 0
                            ? spec.threads
                            : std::max(1u, std::thread::hardware_concurrency());
    constexpr int64_t kChunk = 256;
    const int64_t n_chunks = (trials + kChunk - 1) / kChunk;
    std::atomic<int64_t> next_chunk{0};
    std::mutex merge_mutex;
    PointAccum total;

    const auto start = std::chrono::steady_clock::now();
    const bool capped = spec.time_budget_s > 0.0;

    auto worker = [&]() {
        PointAccum local;
        while (true) {
            if (capped) {
                const std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - start;
                if (elapsed.count() > spec.time_budget_s) break;
            }
            const int64_t chunk = next_chunk.fetch_add(1);
            if (chunk >= n_chunks) break;
            const int64_t begin = chunk * kChunk;
            const int64_t end = std::min(trials, begin + kChunk);
            for (int64_t k = begin; k < end; ++k) {
                const uint64_t seed =
                    derive_trial_seed(spec.master_seed, spec.mode, lattice.d(), p, k);
                local.add(run_single_trial(lattice, cfg, seed));
            }
        }
        const std::lock_guard<std::mutex> lock(merge_mutex);
        total.merge(local);
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(size_t(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return total;
}

ResultRow make_row(const ExperimentSpec& spec, int d, double p, const PointAccum& acc) {
    ResultRow row;
    row.d = d;
    row.p = p;
    row.mode = spec.mode;
    row.trials = acc.trials;
    row.logical_failures = acc.logical + acc.incomplete;
    row.incomplete_failures = acc.incomplete;
    row.overflow_failures = acc.overflow;
    const int64_t failures = row.logical_failures + row.overflow_failures;
    row.p_l = acc.trials > 0 ? double(failures) / double(acc.trials) : 0.0;
    row.p_l_lo = wilson_lower(failures, acc.trials);
    row.p_l_hi = wilson_upper(failures, acc.trials);
    row.cycles_max = acc.cycles.max;
    row.cycles_mean = acc.cycles.mean();
    row.cycles_std = acc.cycles.stddev();
    row.matches_total = acc.matches_total;
    row.matches_dt3 = acc.matches_dt3;
    row.vertical_span_fraction =
        acc.matches_total > 0 ? double(acc.matches_dt3) / double(acc.matches_total) : 0.0;
    return row;
}

}  // namespace

std::vector<ResultRow> run_monte_carlo(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows;
    rows.reserve(spec.distances.size() * spec.p_values.size());
    for (int d : spec.distances) {
        for (double p : spec.p_values) {
            const LatticeConfig lat_cfg = lattice_config_for(spec.mode, d, p, spec.rounds_override);
            const Lattice lattice(lat_cfg);
            const DecoderConfig cfg = decoder_config_for(spec, d, lat_cfg);
            const PointAccum acc = run_point(spec, lattice, cfg, p, spec.trials_for(p));
            rows.push_back(make_row(spec, d, p, acc));
        }
    }
    return rows;
}

ThresholdEstimate threshold_estimate(std::span<const ResultRow> rows) {
    std::map<int, std::map<double, double>> by_d;  // d -> p -> p_l
    std::map<double, int> p_seen;
    for (const auto& row : rows) {
        by_d[row.d][row.p] = row.p_l;
        ++p_seen[row.p];
    }
    if (by_d.size() < 2)
        throw std::invalid_argument("threshold estimation needs at least two code distances");
    if (p_seen.size() < 3)
        throw std::invalid_argument("threshold estimation needs at least three p values");

    // Piecewise-linear ln p_L vs ln p per distance; zero-failure points have
    // no defined log and are dropped.
    std::map<int, std::vector<std::pair<double, double>>> curves;
    for (const auto& [d, pts] : by_d)
        for (const auto& [p, pl] : pts)
            if (p > 0.0 && pl > 0.0) curves[d].emplace_back(std::log(p), std::log(pl));

    ThresholdEstimate est;
    std::vector<int> ds;
    for (const auto& [d, curve] : curves)
        if (curve.size() >= 2) ds.push_back(d);

    for (size_t i = 0; i < ds.size(); ++i) {
        for (size_t j = i + 1; j < ds.size(); ++j) {
            const auto& c1 = curves[ds[i]];
            const auto& c2 = curves[ds[j]];
            // Common grid points (the spec sweeps the same p list per d).
            std::vector<std::pair<double, double>> delta;  // (x, y1 - y2)
            for (const auto& [x, y1] : c1)
                for (const auto& [x2, y2] : c2)
                    if (x == x2) delta.emplace_back(x, y1 - y2);
            std::sort(delta.begin(), delta.end());
            for (size_t k = 0; k + 1 < delta.size(); ++k) {
                const auto [x0, d0] = delta[k];
                const auto [x1, d1] = delta[k + 1];
                if (d0 == 0.0) {
                    est.crossings.push_back(std::exp(x0));
                } else if ((d0 > 0.0) != (d1 > 0.0)) {
                    const double x = x0 + (x1 - x0) * d0 / (d0 - d1);
                    est.crossings.push_back(std::exp(x));
                }
            }
        }
    }

    if (est.crossings.empty()) return est;
    est.found = true;
    std::sort(est.crossings.begin(), est.crossings.end());
    const size_t n = est.crossings.size();
    est.p_th = n % 2 == 1 ? est.crossings[n / 2]
                          : 0.5 * (est.crossings[n / 2 - 1] + est.crossings[n / 2]);
    est.lo = est.crossings.front();
    est.hi = est.crossings.back();
    return est;
}

OracleReport oracle_check(const ExperimentSpec& spec) {
    spec.validate();
    OracleReport report;
    double ratio_sum = 0.0;
    for (int d : spec.distances) {
        for (double p : spec.p_values) {
            const LatticeConfig lat_cfg = lattice_config_for(spec.mode, d, p, spec.rounds_override);
            const Lattice lattice(lat_cfg);
            const DecoderConfig cfg = decoder_config_for(spec, d, lat_cfg);
            const int64_t trials = spec.trials > 0 ? spec.trials : 1000;
            for (int64_t k = 0; k < trials; ++k) {
                const uint64_t seed = derive_trial_seed(spec.master_seed, spec.mode, d, p, k);
                const TrialOutcome trial = run_single_trial(lattice, cfg, seed);
                ++report.trials;
                if (trial.status != DecodeStatus::Ok) ++report.uncleared_trials;
                if (trial.events.size() > size_t(kExactMatcherMaxEvents)) {
                    ++report.skipped_overflow;
                    continue;
                }
                const Matching exact = exact_min_weight_matching(d, trial.events);
                const int64_t decoder_weight = trial.decode.matching_weight();
                ++report.compared;
                report.decoder_weight_total += decoder_weight;
                report.exact_weight_total += exact.weight;
                if (decoder_weight < exact.weight) ++report.ratio_below_one;
                if (exact.weight > 0) {
                    ratio_sum += double(decoder_weight) / double(exact.weight);
                    ++report.trials_with_weight;
                }
            }
        }
    }
    report.mean_weight_ratio =
        report.trials_with_weight > 0 ? ratio_sum / double(report.trials_with_weight) : 1.0;
    return report;
}

std::vector<Event> make_isolated_pair_events(int d, int layers, int n_pairs,
                                             Xoshiro256pp& rng) {
    // Members stay where the cheaper boundary costs at least the pair weight,
    // so the in-pair match strictly beats the (delayed) boundary spike; pairs
    // keep a wide space-time margin from each other.
    constexpr int kSeparation = 10;
    std::vector<Event> events;
    std::vector<Event> accepted;
    int guard = 0;
    while (int(accepted.size()) < 2 * n_pairs && ++guard < 20000) {
        const int w = 1 + int(rng() % 2);
        const int r1 = int(rng() % uint64_t(d));
        const int c1 = int(rng() % uint64_t(d - 1));
        const int tmax = layers - 1 - w;
        if (tmax < 0) break;
        const int t1 = int(rng() % uint64_t(tmax + 1));

        // Random split of w over (dr, dc, dt), each component non-negative.
        int dr = int(rng() % uint64_t(w + 1));
        int dc = int(rng() % uint64_t(w - dr + 1));
        int dt = w - dr - dc;
        const Event e1{int16_t(r1), int16_t(c1), int16_t(t1)};
        const Event e2{int16_t(r1 + dr), int16_t(c1 + dc), int16_t(t1 + dt)};
        if (e2.r >= d || e2.c >= d - 1) continue;

        auto boundary_ok = [&](const Event& e) {
            return boundary_weight(d, e, cheaper_boundary(d, e)) >= w;
        };
        if (!boundary_ok(e1) || !boundary_ok(e2)) continue;

        bool separated = true;
        for (const Event& e : accepted)
            separated = separated && pair_weight(e, e1) >= kSeparation &&
                        pair_weight(e, e2) >= kSeparation;
        if (!separated) continue;
        accepted.push_back(e1);
        accepted.push_back(e2);
    }
    events = accepted;
    return events;
}

SyndromeHistory syndromes_from_events(const LatticeConfig& cfg, std::span<const Event> events) {
    const int rounds = cfg.total_rounds();
    const int n_anc = cfg.n_ancillas();
    SyndromeHistory synd;
    synd.events.assign(size_t(rounds), std::vector<uint8_t>(size_t(n_anc), 0));
    synd.raw.assign(size_t(rounds), std::vector<uint8_t>(size_t(n_anc), 0));
    for (const Event& e : events) {
        if (e.t < 0 || e.t >= rounds || e.r < 0 || e.r >= cfg.rows() || e.c < 0 ||
            e.c >= cfg.cols())
            throw std::invalid_argument("event outside the space-time lattice");
        synd.events[size_t(e.t)][size_t(e.r * cfg.cols() + e.c)] ^= 1;
    }
    for (int t = 0; t < rounds; ++t)
        for (int a = 0; a < n_anc; ++a)
            synd.raw[size_t(t)][size_t(a)] =
                (t > 0 ? synd.raw[size_t(t) - 1][size_t(a)] : 0) ^ synd.events[size_t(t)][size_t(a)];
    return synd;
}

std::vector<Event> collect_events(const SyndromeHistory& syndromes, int cols) {
    std::vector<Event> events;
    for (int t = 0; t < syndromes.rounds(); ++t) {
        const auto& layer = syndromes.events[size_t(t)];
        for (size_t a = 0; a < layer.size(); ++a)
            if (layer[a])
                events.push_back(
                    {int16_t(int(a) / cols), int16_t(int(a) % cols), int16_t(t)});
    }
    return events;
}

namespace {
constexpr double kZ95 = 1.959963984540054;
}

double wilson_lower(int64_t failures, int64_t trials) {
    if (trials <= 0) return 0.0;
    if (failures == 0) return 0.0;  // center == half analytically
    const double n = double(trials);
    const double phat = double(failures) / n;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        kZ95 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return std::max(0.0, center - half);
}

double wilson_upper(int64_t failures, int64_t trials) {
    if (trials <= 0) return 1.0;
    const double n = double(trials);
    const double phat = double(failures) / n;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        kZ95 * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return std::min(1.0, center + half);
}

std::string to_csv(std::span<const ResultRow> rows) {
    std::string out =
        "d,p,mode,trials,logical_failures,overflow_failures,p_l,p_l_lo,p_l_hi,"
        "cycles_max,cycles_mean,cycles_std\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%d,%.10g,%s,%lld,%lld,%lld,%.10g,%.10g,%.10g,%llu,%.10g,%.10g\n", r.d,
                      r.p, to_string(r.mode).c_str(), (long long)r.trials,
                      (long long)r.logical_failures, (long long)r.overflow_failures, r.p_l,
                      r.p_l_lo, r.p_l_hi, (unsigned long long)r.cycles_max, r.cycles_mean,
                      r.cycles_std);
        out += buf;
    }
    return out;
}

std::string to_json(std::span<const ResultRow> rows, const ExperimentSpec& spec) {
    nlohmann::json doc;
    doc["mode"] = to_string(spec.mode);
    doc["master_seed"] = spec.master_seed;
    doc["clock_hz"] = spec.clock_hz;
    doc["meas_interval_s"] = spec.meas_interval_s;
    doc["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row;
        row["d"] = r.d;
        row["p"] = r.p;
        row["mode"] = to_string(r.mode);
        row["trials"] = r.trials;
        row["logical_failures"] = r.logical_failures;
        row["incomplete_failures"] = r.incomplete_failures;
        row["overflow_failures"] = r.overflow_failures;
        row["p_l"] = r.p_l;
        row["p_l_lo"] = r.p_l_lo;
        row["p_l_hi"] = r.p_l_hi;
        row["cycles_max"] = r.cycles_max;
        row["cycles_mean"] = r.cycles_mean;
        row["cycles_std"] = r.cycles_std;
        row["matches_total"] = r.matches_total;
        row["matches_dt3"] = r.matches_dt3;
        row["vertical_span_fraction"] = r.vertical_span_fraction;
        doc["rows"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

}  // namespace qecool
