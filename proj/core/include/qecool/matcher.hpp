/*
 * Exact and greedy minimum-total-Manhattan-weight matching of detection
 * events (with boundary absorption) on the 3-D space-time lattice. Used as
 * the correctness and quality oracle for the grid decoder.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qecool/lattice.hpp"

namespace qecool {

struct Event {
    int16_t r = 0;  // ancilla row
    int16_t c = 0;  // ancilla column
    int16_t t = 0;  // round index

    friend auto operator<=>(const Event&, const Event&) = default;
};

enum class BoundarySide : uint8_t { West, East };

struct Matching {
    std::vector<std::pair<Event, Event>> pairs;
    std::vector<std::pair<Event, BoundarySide>> boundary_matches;
    int64_t weight = 0;
};

// Space-time Manhattan distance |dr| + |dc| + |dt|.
int pair_weight(const Event& a, const Event& b);

// Hops needed to leave the (d-1)-column grid: west c+1, east (d-1)-c.
int boundary_weight(int d, const Event& e, BoundarySide side);

// Cheaper of the two boundary options (never a tie for odd d).
BoundarySide cheaper_boundary(int d, const Event& e);

inline constexpr int kExactMatcherMaxEvents = 20;

class OracleOverflowError : public std::runtime_error {
public:
    explicit OracleOverflowError(size_t n)
        : std::runtime_error("exact matcher limited to " +
                             std::to_string(kExactMatcherMaxEvents) + " events, got " +
                             std::to_string(n)) {}
};

// Globally minimal total weight over all pairings in which every event is
// matched to another event or absorbed by its cheaper boundary. Subset DP,
// O(2^n * n); throws OracleOverflowError above kExactMatcherMaxEvents.
// Ties resolve to the lexicographically smallest encoding: for the lowest
// unmatched event, boundary absorption is preferred, then the lowest partner.
Matching exact_min_weight_matching(int d, std::span<const Event> events);

// Sequential nearest-partner matching mimicking the decoder's token order and
// iterative hop limit; fast stand-in for large instances. An empty schedule
// means hop limits 1, 2, ... until everything is matched.
Matching greedy_matching(int d, std::span<const Event> events,
                         std::span<const int> hop_schedule = {});

// Flips the data qubits along the canonical monotone path of each match:
// the row segment at the first endpoint's row, then the column segment at the
// second endpoint's column. Boundary matches exit horizontally. Temporal
// displacement contributes nothing.
CorrectionSet corrections_from_matching(const Lattice& lattice, const Matching& matching);

}  // namespace qecool
