#include "qecool/matcher.hpp"

#include <gtest/gtest.h>

#include "qecool/experiment.hpp"
#include "support/brute_force.hpp"

using namespace qecool;

TEST(PairWeight, ManhattanExamples) {
    EXPECT_EQ(pair_weight({0, 0, 0}, {0, 0, 0}), 0);
    EXPECT_EQ(pair_weight({1, 2, 0}, {3, 2, 2}), 4);
    EXPECT_EQ(pair_weight({0, 0, 0}, {0, 1, 1}), 2);
}

TEST(BoundaryWeight, HopsToLeaveTheGrid) {
    EXPECT_EQ(boundary_weight(5, {0, 0, 0}, BoundarySide::West), 1);
    EXPECT_EQ(boundary_weight(5, {0, 3, 0}, BoundarySide::East), 1);
    EXPECT_EQ(boundary_weight(5, {0, 1, 0}, BoundarySide::East), 3);
}

TEST(ExactMatcher, EmptyInstance) {
    const Matching m = exact_min_weight_matching(5, {});
    EXPECT_TRUE(m.pairs.empty());
    EXPECT_TRUE(m.boundary_matches.empty());
    EXPECT_EQ(m.weight, 0);
}

TEST(ExactMatcher, PairBeatsBoundaries) {
    // Boundary disposal costs 1 + 2 = 3; the pair costs 2.
    const std::vector<Event> events{{0, 0, 0}, {0, 2, 0}};
    const Matching m = exact_min_weight_matching(5, events);
    EXPECT_EQ(m.weight, 2);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_TRUE(m.boundary_matches.empty());
}

TEST(ExactMatcher, SingleEventTakesCheaperBoundary) {
    const std::vector<Event> events{{0, 0, 0}};
    const Matching m = exact_min_weight_matching(5, events);
    EXPECT_EQ(m.weight, 1);
    ASSERT_EQ(m.boundary_matches.size(), 1u);
    EXPECT_EQ(m.boundary_matches[0].second, BoundarySide::West);
}

TEST(ExactMatcher, TiePrefersBoundaryEncoding) {
    // Pair weight 2 equals boundary total 1 + 1; the boundary encoding wins.
    const std::vector<Event> events{{0, 0, 0}, {0, 0, 2}};
    const Matching m = exact_min_weight_matching(5, events);
    EXPECT_EQ(m.weight, 2);
    EXPECT_EQ(m.boundary_matches.size(), 2u);
    EXPECT_TRUE(m.pairs.empty());
}

TEST(ExactMatcher, OverflowThrows) {
    std::vector<Event> events(size_t(kExactMatcherMaxEvents) + 1, Event{0, 0, 0});
    EXPECT_THROW(exact_min_weight_matching(5, events), OracleOverflowError);
}

TEST(ExactMatcher, AgreesWithBruteForceOnRandomInstances) {
    Xoshiro256pp rng(0xabcde);
    for (int trial = 0; trial < 300; ++trial) {
        const int d = 3 + 2 * int(rng() % 3);
        const int n = int(rng() % 9);
        const auto events = testsupport::random_events(rng, d, 6, n);
        const Matching m = exact_min_weight_matching(d, events);
        EXPECT_EQ(m.weight, testsupport::brute_force_min_weight(d, events))
            << "d=" << d << " n=" << n << " trial=" << trial;
        EXPECT_EQ(m.pairs.size() * 2 + m.boundary_matches.size(), size_t(n));
    }
}

TEST(ExactMatcher, Deterministic) {
    Xoshiro256pp rng(7);
    const auto events = testsupport::random_events(rng, 7, 8, 8);
    const Matching a = exact_min_weight_matching(7, events);
    const Matching b = exact_min_weight_matching(7, events);
    EXPECT_EQ(a.weight, b.weight);
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_EQ(a.boundary_matches, b.boundary_matches);
}

TEST(GreedyMatcher, EmptyInstance) {
    EXPECT_EQ(greedy_matching(5, {}).weight, 0);
}

TEST(GreedyMatcher, NeverBeatsExact) {
    Xoshiro256pp rng(0x5eed);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 5 + 2 * int(rng() % 2);
        const int n = int(rng() % 13);
        const auto events = testsupport::random_events(rng, d, 8, n);
        const Matching greedy = greedy_matching(d, events);
        const Matching exact = exact_min_weight_matching(d, events);
        EXPECT_GE(greedy.weight, exact.weight) << "trial=" << trial;
        EXPECT_EQ(greedy.pairs.size() * 2 + greedy.boundary_matches.size(), size_t(n));
    }
}

TEST(GreedyMatcher, MatchesExactOnIsolatedPairs) {
    Xoshiro256pp rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const auto events = make_isolated_pair_events(9, 8, 3, rng);
        ASSERT_FALSE(events.empty());
        const Matching greedy = greedy_matching(9, events);
        const Matching exact = exact_min_weight_matching(9, events);
        EXPECT_EQ(greedy.weight, exact.weight);
    }
}

TEST(Corrections, VerticalPairFlipsNothing) {
    const Lattice lattice(LatticeConfig{.d = 5, .n_rounds = 3});
    Matching m;
    m.pairs.emplace_back(Event{2, 1, 0}, Event{2, 1, 1});
    EXPECT_EQ(corrections_from_matching(lattice, m).count(), 0);
}

TEST(Corrections, AdjacentPairFlipsTheSharedQubit) {
    const Lattice lattice(LatticeConfig{.d = 3});
    Matching m;
    m.pairs.emplace_back(Event{1, 0, 0}, Event{1, 1, 0});
    const CorrectionSet corr = corrections_from_matching(lattice, m);
    EXPECT_EQ(corr.count(), 1);
    EXPECT_TRUE(corr.contains(lattice.qubit_id(horizontal_qubit(1, 1))));
}

TEST(Corrections, WestBoundaryExitFromColumnZero) {
    const Lattice lattice(LatticeConfig{.d = 5});
    Matching m;
    m.boundary_matches.emplace_back(Event{3, 0, 0}, BoundarySide::West);
    const CorrectionSet corr = corrections_from_matching(lattice, m);
    EXPECT_EQ(corr.count(), 1);
    EXPECT_TRUE(corr.contains(lattice.qubit_id(horizontal_qubit(3, 0))));
}

TEST(Corrections, MonotonePathLengthEqualsSpatialWeight) {
    const Lattice lattice(LatticeConfig{.d = 7, .n_rounds = 5});
    Matching m;
    m.pairs.emplace_back(Event{1, 1, 0}, Event{4, 5, 3});
    const CorrectionSet corr = corrections_from_matching(lattice, m);
    EXPECT_EQ(corr.count(), 3 + 4);  // |dr| + |dc|, time contributes nothing
}

// Matching an entire trial's events and applying the corrections must clear
// the perfect-round syndrome.
TEST(Corrections, ExactMatchingAlwaysClearsTheSyndrome) {
    const LatticeConfig cfg{.d = 5, .p_data = 0.02, .p_meas = 0.02, .n_rounds = 5};
    const Lattice lattice(cfg);
    int nonempty = 0;
    for (uint64_t seed = 1; seed <= 60; ++seed) {
        const ErrorHistory errors = sample_errors(lattice, seed);
        const SyndromeHistory synd = measure_rounds(lattice, errors);
        const auto events = collect_events(synd, lattice.cols());
        if (events.empty() || events.size() > size_t(kExactMatcherMaxEvents)) continue;
        ++nonempty;
        const Matching m = exact_min_weight_matching(cfg.d, events);
        const CorrectionSet corr = corrections_from_matching(lattice, m);
        const auto residual = apply_correction(cumulative_error(errors), corr);
        EXPECT_TRUE(syndrome_is_clear(lattice, residual)) << "seed=" << seed;
    }
    EXPECT_GT(nonempty, 10);
}
