/*
 * Planar surface-code slice for a single Pauli error sector under
 * phenomenological noise: geometry, noise sampling, syndrome extraction,
 * corrections, and the logical-failure decision.
 *
 * Ancillas form a d x (d-1) grid. Data qubits sit on the edges of that grid:
 * "horizontal" qubits within a row (d per row, including the dangling
 * west/east boundary edges) and "vertical" qubits between adjacent rows.
 * Logical chains of this sector run west to east.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qecool/rng.hpp"

namespace qecool {

struct LatticeConfig {
    int d = 3;                        // code distance, odd, >= 3
    double p_data = 0.0;              // per-round data-qubit flip probability
    double p_meas = 0.0;              // per-round measurement flip probability
    int n_rounds = 1;                 // noisy measurement rounds per trial
    bool final_round_perfect = true;  // append one noiseless readout round
    // Detection events default to the XOR of consecutive raw measurements.
    // The stored-difference recurrence (each round XORs the new raw value
    // into the previously stored difference) is kept selectable because the
    // two readings disagree from the third round on.
    bool literal_event_recurrence = false;

    int rows() const { return d; }
    int cols() const { return d - 1; }
    int n_ancillas() const { return d * (d - 1); }
    int total_rounds() const { return n_rounds + (final_round_perfect ? 1 : 0); }

    void validate() const;  // throws std::invalid_argument
};

enum class QubitKind : uint8_t { Horizontal, Vertical };

struct DataQubitIndex {
    QubitKind kind{QubitKind::Horizontal};
    int16_t r = 0;  // Horizontal: r in [0,d);   Vertical: r in [0,d-1)
    int16_t i = 0;  // Horizontal: i in [0,d);   Vertical: i in [0,d-1)

    friend auto operator<=>(const DataQubitIndex&, const DataQubitIndex&) = default;
};

inline DataQubitIndex horizontal_qubit(int r, int i) {
    return {QubitKind::Horizontal, int16_t(r), int16_t(i)};
}
inline DataQubitIndex vertical_qubit(int r, int i) {
    return {QubitKind::Vertical, int16_t(r), int16_t(i)};
}

std::string to_string(const DataQubitIndex& q);

// Set of data-qubit flips, multiplicity mod 2. Applying a set twice is the
// identity on any error state.
class CorrectionSet {
public:
    CorrectionSet() = default;
    explicit CorrectionSet(int n_qubits) : flips_(size_t(n_qubits), 0) {}

    void toggle(int qubit_id) { flips_[size_t(qubit_id)] ^= 1; }
    bool contains(int qubit_id) const { return flips_[size_t(qubit_id)] != 0; }
    int size() const { return int(flips_.size()); }
    int count() const;
    bool empty() const { return count() == 0; }
    std::span<const uint8_t> bits() const { return flips_; }
    void merge(const CorrectionSet& other);

private:
    std::vector<uint8_t> flips_;
};

struct ErrorHistory {
    // One row per round (including the appended perfect round, whose entries
    // are all false). Entries are 0/1.
    std::vector<std::vector<uint8_t>> data_flips;  // [round][qubit_id]
    std::vector<std::vector<uint8_t>> meas_flips;  // [round][ancilla]

    int rounds() const { return int(data_flips.size()); }
};

struct SyndromeHistory {
    std::vector<std::vector<uint8_t>> raw;     // ancilla parity outcome per round
    std::vector<std::vector<uint8_t>> events;  // detection events per round

    int rounds() const { return int(events.size()); }
};

class Lattice {
public:
    explicit Lattice(LatticeConfig cfg);

    const LatticeConfig& config() const { return cfg_; }
    int d() const { return cfg_.d; }
    int rows() const { return cfg_.rows(); }
    int cols() const { return cfg_.cols(); }
    int n_ancillas() const { return cfg_.n_ancillas(); }
    int n_qubits() const { return n_qubits_; }

    int ancilla_index(int r, int c) const { return r * cols() + c; }

    int qubit_id(const DataQubitIndex& q) const;
    DataQubitIndex qubit_at(int qubit_id) const;

    // Data qubits checked by ancilla (r,c): H(r,c), H(r,c+1), plus V(r-1,c)
    // when r > 0 and V(r,c) when r < d-1. Interior ancillas have degree 4,
    // top/bottom rows degree 3.
    std::span<const int> neighbors(int ancilla) const;

private:
    LatticeConfig cfg_;
    int n_qubits_ = 0;
    std::vector<int> adjacency_;         // flattened neighbor lists
    std::vector<int> adjacency_offset_;  // n_ancillas + 1 offsets
};

Lattice build_lattice(const LatticeConfig& cfg);

// Independent Bernoulli flips per round; deterministic for a given seed.
ErrorHistory sample_errors(const Lattice& lattice, uint64_t seed);

// raw[t][a] = parity of the cumulative data error on a's neighbors at round t,
// XOR the round's measurement flip; events are the consecutive-round XOR
// (events[0] = raw[0]) unless the literal recurrence is selected.
SyndromeHistory measure_rounds(const Lattice& lattice, const ErrorHistory& errors);

// Cumulative data-error state after the last round (XOR of all per-round flips).
std::vector<uint8_t> cumulative_error(const ErrorHistory& errors);

// residual[q] = state[q] XOR corr[q]. Throws std::logic_error on size mismatch.
std::vector<uint8_t> apply_correction(std::span<const uint8_t> state, const CorrectionSet& corr);

// Perfect-measurement syndrome of a data-error state.
std::vector<uint8_t> syndrome_of(const Lattice& lattice, std::span<const uint8_t> state);
bool syndrome_is_clear(const Lattice& lattice, std::span<const uint8_t> state);

// True iff the residual chain crosses west to east: odd parity on the fixed
// cut {H(r,0) : r in [0,d)}. Requires a cleared syndrome (throws
// std::logic_error otherwise; callers classify that case as a decoder-
// incomplete trial failure instead).
bool logical_failure(const Lattice& lattice, std::span<const uint8_t> residual);

}  // namespace qecool
