#include "qecool/matcher.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace qecool {

int pair_weight(const Event& a, const Event& b) {
    return std::abs(a.r - b.r) + std::abs(a.c - b.c) + std::abs(a.t - b.t);
}

int boundary_weight(int d, const Event& e, BoundarySide side) {
    return side == BoundarySide::West ? e.c + 1 : (d - 1) - e.c;
}

BoundarySide cheaper_boundary(int d, const Event& e) {
    return boundary_weight(d, e, BoundarySide::West) <= boundary_weight(d, e, BoundarySide::East)
               ? BoundarySide::West
               : BoundarySide::East;
}

Matching exact_min_weight_matching(int d, std::span<const Event> events) {
    const size_t n = events.size();
    if (n > size_t(kExactMatcherMaxEvents)) throw OracleOverflowError(n);

    Matching result;
    if (n == 0) return result;

    std::vector<int> bcost(n);
    for (size_t i = 0; i < n; ++i)
        bcost[i] = boundary_weight(d, events[i], cheaper_boundary(d, events[i]));

    std::vector<int> pcost(n * n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) pcost[i * n + j] = pair_weight(events[i], events[j]);

    constexpr int64_t kInf = std::numeric_limits<int64_t>::max() / 4;
    const uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
    std::vector<int64_t> best(size_t(full) + 1, kInf);
    std::vector<int8_t> choice(size_t(full) + 1, -1);  // partner index, -1 = boundary
    best[0] = 0;

    for (uint32_t mask = 1; mask <= full; ++mask) {
        const int i = std::countr_zero(mask);
        // Boundary option first: ties keep the lexicographically smallest
        // encoding (boundary, then lowest partner).
        int64_t b = best[mask ^ (1u << i)];
        if (b < kInf) b += bcost[size_t(i)];
        best[mask] = b;
        choice[mask] = -1;
        uint32_t rest = mask & ~(1u << i);
        while (rest) {
            const int j = std::countr_zero(rest);
            rest &= rest - 1;
            const int64_t prev = best[mask ^ (1u << i) ^ (1u << j)];
            if (prev >= kInf) continue;
            const int64_t cand = prev + pcost[size_t(i) * n + size_t(j)];
            if (cand < best[mask]) {
                best[mask] = cand;
                choice[mask] = int8_t(j);
            }
        }
    }

    result.weight = best[full];
    uint32_t mask = full;
    while (mask) {
        const int i = std::countr_zero(mask);
        const int j = choice[mask];
        if (j < 0) {
            result.boundary_matches.emplace_back(events[size_t(i)],
                                                 cheaper_boundary(d, events[size_t(i)]));
            mask ^= 1u << i;
        } else {
            result.pairs.emplace_back(events[size_t(i)], events[size_t(j)]);
            mask ^= (1u << i) | (1u << j);
        }
    }
    return result;
}

Matching greedy_matching(int d, std::span<const Event> events,
                         std::span<const int> hop_schedule) {
    Matching result;
    const size_t n = events.size();
    if (n == 0) return result;

    // Token order: oldest layer first, then raster order.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const Event &ea = events[a], &eb = events[b];
        return std::tie(ea.t, ea.r, ea.c) < std::tie(eb.t, eb.r, eb.c);
    });

    std::vector<uint8_t> matched(n, 0);
    size_t remaining = n;

    auto run_hop = [&](int hop_limit) {
        // Mirrors the hardware reach at iteration C: an arrival within
        // timeout(C) cycles, boundary spikes delayed one cycle.
        const int window = 2 + 2 * hop_limit;
        for (size_t oi = 0; oi < n && remaining > 0; ++oi) {
            const size_t i = order[oi];
            if (matched[i]) continue;
            int best_arrival = window + 1;
            int best_j = -1;
            for (size_t oj = 0; oj < n; ++oj) {
                const size_t j = order[oj];
                if (j == i || matched[j]) continue;
                const int w = pair_weight(events[i], events[j]);
                if (w < best_arrival) {
                    best_arrival = w;
                    best_j = int(j);
                }
            }
            const BoundarySide side = cheaper_boundary(d, events[i]);
            const int bw = boundary_weight(d, events[i], side);
            if (bw + 1 < best_arrival) {
                best_j = -1;
                best_arrival = bw + 1;
            }
            if (best_arrival > window) continue;
            matched[i] = 1;
            --remaining;
            if (best_j >= 0) {
                matched[size_t(best_j)] = 1;
                --remaining;
                result.pairs.emplace_back(events[i], events[size_t(best_j)]);
                result.weight += pair_weight(events[i], events[size_t(best_j)]);
            } else {
                result.boundary_matches.emplace_back(events[i], side);
                result.weight += bw;
            }
        }
    };

    if (!hop_schedule.empty()) {
        for (int c : hop_schedule) {
            run_hop(c);
            if (remaining == 0) break;
        }
    }
    for (int c = 1; remaining > 0; ++c) run_hop(c);
    return result;
}

CorrectionSet corrections_from_matching(const Lattice& lattice, const Matching& matching) {
    CorrectionSet corr(lattice.n_qubits());

    auto flip_row_segment = [&](int r, int c_from, int c_to) {
        // Between ancillas (r,c) and (r,c+1) sits H(r, c+1).
        const int lo = std::min(c_from, c_to), hi = std::max(c_from, c_to);
        for (int c = lo + 1; c <= hi; ++c)
            corr.toggle(lattice.qubit_id(horizontal_qubit(r, c)));
    };
    auto flip_col_segment = [&](int c, int r_from, int r_to) {
        // Between ancillas (r,c) and (r+1,c) sits V(r, c).
        const int lo = std::min(r_from, r_to), hi = std::max(r_from, r_to);
        for (int r = lo; r < hi; ++r)
            corr.toggle(lattice.qubit_id(vertical_qubit(r, c)));
    };

    for (const auto& [a, b] : matching.pairs) {
        const Event& first = std::min(a, b);
        const Event& second = std::max(a, b);
        flip_row_segment(first.r, first.c, second.c);
        flip_col_segment(second.c, first.r, second.r);
    }
    for (const auto& [e, side] : matching.boundary_matches) {
        if (side == BoundarySide::West) {
            for (int i = 0; i <= e.c; ++i)
                corr.toggle(lattice.qubit_id(horizontal_qubit(e.r, i)));
        } else {
            for (int i = e.c + 1; i < lattice.d(); ++i)
                corr.toggle(lattice.qubit_id(horizontal_qubit(e.r, i)));
        }
    }
    return corr;
}

}  // namespace qecool
