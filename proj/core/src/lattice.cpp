#include "qecool/lattice.hpp"

#include <numeric>
#include <stdexcept>

namespace qecool {

void LatticeConfig::validate() const {
    if (d < 3 || d % 2 == 0)
        throw std::invalid_argument("code distance must be odd and >= 3, got " + std::to_string(d));
    if (p_data < 0.0 || p_data > 1.0)
        throw std::invalid_argument("p_data must lie in [0, 1]");
    if (p_meas < 0.0 || p_meas > 1.0)
        throw std::invalid_argument("p_meas must lie in [0, 1]");
    if (n_rounds < 1)
        throw std::invalid_argument("n_rounds must be >= 1");
}

std::string to_string(const DataQubitIndex& q) {
    return std::string(q.kind == QubitKind::Horizontal ? "H(" : "V(") +
           std::to_string(q.r) + "," + std::to_string(q.i) + ")";
}

int CorrectionSet::count() const {
    return int(std::accumulate(flips_.begin(), flips_.end(), 0));
}

void CorrectionSet::merge(const CorrectionSet& other) {
    if (other.flips_.size() != flips_.size())
        throw std::logic_error("correction-set size mismatch");
    for (size_t i = 0; i < flips_.size(); ++i) flips_[i] ^= other.flips_[i];
}

Lattice::Lattice(LatticeConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.d;
    n_qubits_ = d * d + (d - 1) * (d - 1);

    adjacency_offset_.reserve(size_t(n_ancillas()) + 1);
    adjacency_offset_.push_back(0);
    for (int r = 0; r < rows(); ++r) {
        for (int c = 0; c < cols(); ++c) {
            adjacency_.push_back(qubit_id(horizontal_qubit(r, c)));
            adjacency_.push_back(qubit_id(horizontal_qubit(r, c + 1)));
            if (r > 0) adjacency_.push_back(qubit_id(vertical_qubit(r - 1, c)));
            if (r < d - 1) adjacency_.push_back(qubit_id(vertical_qubit(r, c)));
            adjacency_offset_.push_back(int(adjacency_.size()));
        }
    }
}

int Lattice::qubit_id(const DataQubitIndex& q) const {
    const int d = cfg_.d;
    if (q.kind == QubitKind::Horizontal) {
        if (q.r < 0 || q.r >= d || q.i < 0 || q.i >= d)
            throw std::logic_error("horizontal qubit index out of range: " + to_string(q));
        return q.r * d + q.i;
    }
    if (q.r < 0 || q.r >= d - 1 || q.i < 0 || q.i >= d - 1)
        throw std::logic_error("vertical qubit index out of range: " + to_string(q));
    return d * d + q.r * (d - 1) + q.i;
}

DataQubitIndex Lattice::qubit_at(int qubit_id) const {
    const int d = cfg_.d;
    if (qubit_id < 0 || qubit_id >= n_qubits_)
        throw std::logic_error("qubit id out of range: " + std::to_string(qubit_id));
    if (qubit_id < d * d) return horizontal_qubit(qubit_id / d, qubit_id % d);
    const int v = qubit_id - d * d;
    return vertical_qubit(v / (d - 1), v % (d - 1));
}

std::span<const int> Lattice::neighbors(int ancilla) const {
    const int begin = adjacency_offset_[size_t(ancilla)];
    const int end = adjacency_offset_[size_t(ancilla) + 1];
    return {adjacency_.data() + begin, size_t(end - begin)};
}

Lattice build_lattice(const LatticeConfig& cfg) { return Lattice(cfg); }

ErrorHistory sample_errors(const Lattice& lattice, uint64_t seed) {
    const LatticeConfig& cfg = lattice.config();
    const int total = cfg.total_rounds();
    Xoshiro256pp rng(seed);

    ErrorHistory hist;
    hist.data_flips.assign(size_t(total), std::vector<uint8_t>(size_t(lattice.n_qubits()), 0));
    hist.meas_flips.assign(size_t(total), std::vector<uint8_t>(size_t(lattice.n_ancillas()), 0));

    for (int t = 0; t < cfg.n_rounds; ++t) {
        auto& data = hist.data_flips[size_t(t)];
        for_each_bernoulli_hit(rng, data.size(), cfg.p_data, [&](size_t q) { data[q] = 1; });
        auto& meas = hist.meas_flips[size_t(t)];
        for_each_bernoulli_hit(rng, meas.size(), cfg.p_meas, [&](size_t a) { meas[a] = 1; });
    }
    // The appended perfect round (when present) keeps all-false rows.
    return hist;
}

SyndromeHistory measure_rounds(const Lattice& lattice, const ErrorHistory& errors) {
    const int total = errors.rounds();
    const int n_anc = lattice.n_ancillas();
    if (int(errors.meas_flips.size()) != total)
        throw std::logic_error("error history rows mismatch");

    SyndromeHistory synd;
    synd.raw.assign(size_t(total), std::vector<uint8_t>(size_t(n_anc), 0));
    synd.events.assign(size_t(total), std::vector<uint8_t>(size_t(n_anc), 0));

    std::vector<uint8_t> cumulative(size_t(lattice.n_qubits()), 0);
    for (int t = 0; t < total; ++t) {
        const auto& flips = errors.data_flips[size_t(t)];
        for (size_t q = 0; q < cumulative.size(); ++q) cumulative[q] ^= flips[q];

        auto& raw = synd.raw[size_t(t)];
        for (int a = 0; a < n_anc; ++a) {
            uint8_t parity = 0;
            for (int q : lattice.neighbors(a)) parity ^= cumulative[size_t(q)];
            raw[size_t(a)] = parity ^ errors.meas_flips[size_t(t)][size_t(a)];
        }

        auto& events = synd.events[size_t(t)];
        if (t == 0) {
            events = raw;
        } else if (lattice.config().literal_event_recurrence) {
            // Stored-difference reading: new value XORed into the previous
            // stored difference rather than the previous raw measurement.
            const auto& prev = synd.events[size_t(t) - 1];
            for (int a = 0; a < n_anc; ++a) events[size_t(a)] = prev[size_t(a)] ^ raw[size_t(a)];
        } else {
            const auto& prev = synd.raw[size_t(t) - 1];
            for (int a = 0; a < n_anc; ++a) events[size_t(a)] = prev[size_t(a)] ^ raw[size_t(a)];
        }
    }
    return synd;
}

std::vector<uint8_t> cumulative_error(const ErrorHistory& errors) {
    if (errors.data_flips.empty()) return {};
    std::vector<uint8_t> state(errors.data_flips.front().size(), 0);
    for (const auto& flips : errors.data_flips)
        for (size_t q = 0; q < state.size(); ++q) state[q] ^= flips[q];
    return state;
}

std::vector<uint8_t> apply_correction(std::span<const uint8_t> state, const CorrectionSet& corr) {
    if (int(state.size()) != corr.size())
        throw std::logic_error("correction applied to mismatched error state");
    std::vector<uint8_t> residual(state.begin(), state.end());
    const auto bits = corr.bits();
    for (size_t q = 0; q < residual.size(); ++q) residual[q] ^= bits[q];
    return residual;
}

std::vector<uint8_t> syndrome_of(const Lattice& lattice, std::span<const uint8_t> state) {
    std::vector<uint8_t> synd(size_t(lattice.n_ancillas()), 0);
    for (int a = 0; a < lattice.n_ancillas(); ++a) {
        uint8_t parity = 0;
        for (int q : lattice.neighbors(a)) parity ^= state[size_t(q)];
        synd[size_t(a)] = parity;
    }
    return synd;
}

bool syndrome_is_clear(const Lattice& lattice, std::span<const uint8_t> state) {
    for (int a = 0; a < lattice.n_ancillas(); ++a) {
        uint8_t parity = 0;
        for (int q : lattice.neighbors(a)) parity ^= state[size_t(q)];
        if (parity) return false;
    }
    return true;
}

bool logical_failure(const Lattice& lattice, std::span<const uint8_t> residual) {
    if (!syndrome_is_clear(lattice, residual))
        throw std::logic_error("logical_failure called on a residual with uncleared syndrome");
    uint8_t parity = 0;
    for (int r = 0; r < lattice.d(); ++r)
        parity ^= residual[size_t(lattice.qubit_id(horizontal_qubit(r, 0)))];
    return parity != 0;
}

}  // namespace qecool
