#include "qecool/lattice.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace qecool;

namespace {

std::set<DataQubitIndex> neighbor_set(const Lattice& lattice, int r, int c) {
    std::set<DataQubitIndex> out;
    for (int q : lattice.neighbors(lattice.ancilla_index(r, c))) out.insert(lattice.qubit_at(q));
    return out;
}

// X-sector stabilizer generators: the faces of the ancilla grid graph,
// including the three-edge faces open to the west/east boundary.
std::vector<std::vector<DataQubitIndex>> stabilizer_flip_sets(int d) {
    std::vector<std::vector<DataQubitIndex>> faces;
    for (int r = 0; r + 1 < d; ++r) {
        faces.push_back({horizontal_qubit(r, 0), horizontal_qubit(r + 1, 0), vertical_qubit(r, 0)});
        faces.push_back({horizontal_qubit(r, d - 1), horizontal_qubit(r + 1, d - 1),
                         vertical_qubit(r, d - 2)});
        for (int c = 0; c + 1 < d - 1; ++c)
            faces.push_back({vertical_qubit(r, c), vertical_qubit(r, c + 1),
                             horizontal_qubit(r, c + 1), horizontal_qubit(r + 1, c + 1)});
    }
    return faces;
}

}  // namespace

TEST(LatticeConfig, RejectsInvalidDistance) {
    EXPECT_THROW(Lattice(LatticeConfig{.d = 4}), std::invalid_argument);
    EXPECT_THROW(Lattice(LatticeConfig{.d = 1}), std::invalid_argument);
    EXPECT_THROW(Lattice(LatticeConfig{.d = 3, .p_data = 1.5}), std::invalid_argument);
}

TEST(Lattice, CountsMatchTheClosedForm) {
    const Lattice l3(LatticeConfig{.d = 3});
    EXPECT_EQ(l3.n_ancillas(), 6);
    EXPECT_EQ(l3.n_qubits(), 13);  // 9 + 4

    const Lattice l5(LatticeConfig{.d = 5});
    EXPECT_EQ(l5.n_ancillas(), 20);
    EXPECT_EQ(l5.n_qubits(), 41);  // 25 + 16
}

TEST(Lattice, AdjacencyOfAnInteriorAncilla) {
    const Lattice lattice(LatticeConfig{.d = 3});
    const std::set<DataQubitIndex> expected{horizontal_qubit(1, 0), horizontal_qubit(1, 1),
                                            vertical_qubit(0, 0), vertical_qubit(1, 0)};
    EXPECT_EQ(neighbor_set(lattice, 1, 0), expected);
}

TEST(Lattice, TopAndBottomRowsHaveDegreeThree) {
    const Lattice lattice(LatticeConfig{.d = 5});
    for (int c = 0; c < lattice.cols(); ++c) {
        EXPECT_EQ(lattice.neighbors(lattice.ancilla_index(0, c)).size(), 3u);
        EXPECT_EQ(lattice.neighbors(lattice.ancilla_index(4, c)).size(), 3u);
        for (int r = 1; r < 4; ++r)
            EXPECT_EQ(lattice.neighbors(lattice.ancilla_index(r, c)).size(), 4u);
    }
}

TEST(Lattice, QubitIdRoundTrip) {
    const Lattice lattice(LatticeConfig{.d = 5});
    for (int q = 0; q < lattice.n_qubits(); ++q)
        EXPECT_EQ(lattice.qubit_id(lattice.qubit_at(q)), q);
}

TEST(SampleErrors, ZeroProbabilityGivesAllFalse) {
    const Lattice lattice(LatticeConfig{.d = 3, .n_rounds = 4});
    const ErrorHistory hist = sample_errors(lattice, 99);
    EXPECT_EQ(hist.rounds(), 5);  // 4 noisy + 1 perfect
    for (const auto& round : hist.data_flips)
        EXPECT_TRUE(std::all_of(round.begin(), round.end(), [](uint8_t b) { return !b; }));
}

TEST(SampleErrors, CertainFlipHitsEveryQubit) {
    const Lattice lattice(LatticeConfig{.d = 3, .p_data = 1.0, .n_rounds = 1});
    const ErrorHistory hist = sample_errors(lattice, 7);
    EXPECT_TRUE(std::all_of(hist.data_flips[0].begin(), hist.data_flips[0].end(),
                            [](uint8_t b) { return b == 1; }));
    // The appended perfect round stays clean.
    EXPECT_TRUE(std::all_of(hist.data_flips[1].begin(), hist.data_flips[1].end(),
                            [](uint8_t b) { return b == 0; }));
    EXPECT_TRUE(std::all_of(hist.meas_flips[1].begin(), hist.meas_flips[1].end(),
                            [](uint8_t b) { return b == 0; }));
}

TEST(SampleErrors, DeterministicGivenSeed) {
    const Lattice lattice(LatticeConfig{.d = 5, .p_data = 0.1, .p_meas = 0.1, .n_rounds = 5});
    const ErrorHistory a = sample_errors(lattice, 0x5eed);
    const ErrorHistory b = sample_errors(lattice, 0x5eed);
    EXPECT_EQ(a.data_flips, b.data_flips);
    EXPECT_EQ(a.meas_flips, b.meas_flips);
    const ErrorHistory c = sample_errors(lattice, 0x5eed + 1);
    EXPECT_NE(a.data_flips, c.data_flips);
}

TEST(MeasureRounds, SingleInteriorFlipSetsBothChecksEveryRound) {
    const LatticeConfig cfg{.d = 3, .n_rounds = 3};
    const Lattice lattice(cfg);
    ErrorHistory hist;
    hist.data_flips.assign(4, std::vector<uint8_t>(size_t(lattice.n_qubits()), 0));
    hist.meas_flips.assign(4, std::vector<uint8_t>(size_t(lattice.n_ancillas()), 0));
    hist.data_flips[0][size_t(lattice.qubit_id(horizontal_qubit(1, 1)))] = 1;

    const SyndromeHistory synd = measure_rounds(lattice, hist);
    for (int t = 0; t < 4; ++t) {
        for (int a = 0; a < lattice.n_ancillas(); ++a) {
            const bool expected =
                a == lattice.ancilla_index(1, 0) || a == lattice.ancilla_index(1, 1);
            EXPECT_EQ(synd.raw[size_t(t)][size_t(a)] != 0, expected) << "t=" << t << " a=" << a;
            const bool expected_event = expected && t == 0;
            EXPECT_EQ(synd.events[size_t(t)][size_t(a)] != 0, expected_event);
        }
    }
}

TEST(MeasureRounds, MeasurementFlipMakesTwoEvents) {
    const LatticeConfig cfg{.d = 3, .n_rounds = 3};
    const Lattice lattice(cfg);
    ErrorHistory hist;
    hist.data_flips.assign(4, std::vector<uint8_t>(size_t(lattice.n_qubits()), 0));
    hist.meas_flips.assign(4, std::vector<uint8_t>(size_t(lattice.n_ancillas()), 0));
    const int a = lattice.ancilla_index(2, 1);
    hist.meas_flips[1][size_t(a)] = 1;

    const SyndromeHistory synd = measure_rounds(lattice, hist);
    for (int t = 0; t < 4; ++t)
        for (int aa = 0; aa < lattice.n_ancillas(); ++aa)
            EXPECT_EQ(synd.events[size_t(t)][size_t(aa)] != 0,
                      aa == a && (t == 1 || t == 2));
}

TEST(MeasureRounds, BoundaryQubitMakesWeightOneSyndrome) {
    const LatticeConfig cfg{.d = 3};
    const Lattice lattice(cfg);
    ErrorHistory hist;
    hist.data_flips.assign(2, std::vector<uint8_t>(size_t(lattice.n_qubits()), 0));
    hist.meas_flips.assign(2, std::vector<uint8_t>(size_t(lattice.n_ancillas()), 0));
    hist.data_flips[0][size_t(lattice.qubit_id(horizontal_qubit(0, 0)))] = 1;

    const SyndromeHistory synd = measure_rounds(lattice, hist);
    for (int a = 0; a < lattice.n_ancillas(); ++a)
        EXPECT_EQ(synd.raw[0][size_t(a)] != 0, a == lattice.ancilla_index(0, 0));
}

TEST(MeasureRounds, LiteralRecurrenceDivergesFromThirdRoundOn) {
    LatticeConfig cfg{.d = 3, .n_rounds = 3, .final_round_perfect = false};
    const Lattice standard(cfg);
    cfg.literal_event_recurrence = true;
    const Lattice literal(cfg);

    ErrorHistory hist;
    hist.data_flips.assign(3, std::vector<uint8_t>(size_t(standard.n_qubits()), 0));
    hist.meas_flips.assign(3, std::vector<uint8_t>(size_t(standard.n_ancillas()), 0));
    hist.meas_flips[0][0] = 1;  // one measurement flip in round 0

    const SyndromeHistory s = measure_rounds(standard, hist);
    const SyndromeHistory l = measure_rounds(literal, hist);
    // Standard: events at rounds 0 and 1 only. Literal: the stored
    // difference keeps re-flagging every round.
    EXPECT_EQ(s.events[0][0], 1);
    EXPECT_EQ(s.events[1][0], 1);
    EXPECT_EQ(s.events[2][0], 0);
    EXPECT_EQ(l.events[0][0], 1);
    EXPECT_EQ(l.events[1][0], 1);
    EXPECT_EQ(l.events[2][0], 1);
}

TEST(MeasureRounds, EventsAreLinearWithoutMeasurementNoise) {
    const LatticeConfig cfg{.d = 5, .p_data = 0.2, .n_rounds = 4};
    const Lattice lattice(cfg);
    const ErrorHistory e1 = sample_errors(lattice, 11);
    const ErrorHistory e2 = sample_errors(lattice, 22);
    ErrorHistory both = e1;
    for (int t = 0; t < both.rounds(); ++t)
        for (size_t q = 0; q < both.data_flips[size_t(t)].size(); ++q)
            both.data_flips[size_t(t)][q] ^= e2.data_flips[size_t(t)][q];

    const SyndromeHistory s1 = measure_rounds(lattice, e1);
    const SyndromeHistory s2 = measure_rounds(lattice, e2);
    const SyndromeHistory sb = measure_rounds(lattice, both);
    for (int t = 0; t < sb.rounds(); ++t)
        for (size_t a = 0; a < sb.events[size_t(t)].size(); ++a)
            EXPECT_EQ(sb.events[size_t(t)][a],
                      s1.events[size_t(t)][a] ^ s2.events[size_t(t)][a]);
}

TEST(MeasureRounds, EverySingleDataErrorMakesOneOrTwoEvents) {
    for (int d : {3, 5}) {
        const LatticeConfig cfg{.d = d};
        const Lattice lattice(cfg);
        for (int q = 0; q < lattice.n_qubits(); ++q) {
            ErrorHistory hist;
            hist.data_flips.assign(2, std::vector<uint8_t>(size_t(lattice.n_qubits()), 0));
            hist.meas_flips.assign(2, std::vector<uint8_t>(size_t(lattice.n_ancillas()), 0));
            hist.data_flips[0][size_t(q)] = 1;
            const SyndromeHistory synd = measure_rounds(lattice, hist);
            int events_round0 = 0, events_later = 0;
            for (int t = 0; t < synd.rounds(); ++t)
                for (uint8_t b : synd.events[size_t(t)]) (t == 0 ? events_round0 : events_later) += b;
            EXPECT_EQ(events_later, 0);
            const DataQubitIndex idx = lattice.qubit_at(q);
            const bool boundary =
                idx.kind == QubitKind::Horizontal && (idx.i == 0 || idx.i == d - 1);
            EXPECT_EQ(events_round0, boundary ? 1 : 2) << to_string(idx);
        }
    }
}

TEST(ApplyCorrection, InvolutionAndIdentity) {
    const Lattice lattice(LatticeConfig{.d = 3});
    std::vector<uint8_t> state(size_t(lattice.n_qubits()), 0);
    state[3] = state[7] = 1;

    CorrectionSet empty(lattice.n_qubits());
    EXPECT_EQ(apply_correction(state, empty), state);

    CorrectionSet corr(lattice.n_qubits());
    corr.toggle(3);
    corr.toggle(5);
    const auto once = apply_correction(state, corr);
    EXPECT_NE(once, state);
    EXPECT_EQ(apply_correction(once, corr), state);

    CorrectionSet exact(lattice.n_qubits());
    exact.toggle(3);
    exact.toggle(7);
    const auto residual = apply_correction(state, exact);
    EXPECT_TRUE(std::all_of(residual.begin(), residual.end(), [](uint8_t b) { return !b; }));
}

TEST(LogicalFailure, EmptyResidualIsClean) {
    const Lattice lattice(LatticeConfig{.d = 5});
    const std::vector<uint8_t> residual(size_t(lattice.n_qubits()), 0);
    EXPECT_FALSE(logical_failure(lattice, residual));
}

TEST(LogicalFailure, FullRowChainCrosses) {
    const Lattice lattice(LatticeConfig{.d = 5});
    std::vector<uint8_t> residual(size_t(lattice.n_qubits()), 0);
    for (int i = 0; i < 5; ++i)
        residual[size_t(lattice.qubit_id(horizontal_qubit(2, i)))] = 1;
    EXPECT_TRUE(syndrome_is_clear(lattice, residual));
    EXPECT_TRUE(logical_failure(lattice, residual));
}

TEST(LogicalFailure, ClosedPlaquetteLoopDoesNot) {
    // 4-cycle around the vertical qubit pair V(1,1)/V(1,2) on d=5.
    const Lattice lattice(LatticeConfig{.d = 5});
    std::vector<uint8_t> residual(size_t(lattice.n_qubits()), 0);
    for (const DataQubitIndex& q :
         {vertical_qubit(1, 1), vertical_qubit(1, 2), horizontal_qubit(1, 2),
          horizontal_qubit(2, 2)})
        residual[size_t(lattice.qubit_id(q))] = 1;
    EXPECT_TRUE(syndrome_is_clear(lattice, residual));
    EXPECT_FALSE(logical_failure(lattice, residual));
}

TEST(LogicalFailure, UnclearedSyndromeThrows) {
    const Lattice lattice(LatticeConfig{.d = 3});
    std::vector<uint8_t> residual(size_t(lattice.n_qubits()), 0);
    residual[size_t(lattice.qubit_id(horizontal_qubit(1, 1)))] = 1;
    EXPECT_THROW(logical_failure(lattice, residual), std::logic_error);
}

TEST(LogicalFailure, InvariantUnderEveryStabilizer) {
    const int d = 5;
    const Lattice lattice(LatticeConfig{.d = d});
    Xoshiro256pp rng(314);
    const auto faces = stabilizer_flip_sets(d);

    for (int trial = 0; trial < 40; ++trial) {
        // Random cycle: a random subset of faces, possibly plus the logical chain.
        std::vector<uint8_t> residual(size_t(lattice.n_qubits()), 0);
        for (const auto& face : faces)
            if (rng.bernoulli(0.3))
                for (const auto& q : face) residual[size_t(lattice.qubit_id(q))] ^= 1;
        const bool with_logical = rng.bernoulli(0.5);
        if (with_logical)
            for (int i = 0; i < d; ++i)
                residual[size_t(lattice.qubit_id(horizontal_qubit(1, i)))] ^= 1;

        ASSERT_TRUE(syndrome_is_clear(lattice, residual));
        EXPECT_EQ(logical_failure(lattice, residual), with_logical);

        // Adding any single stabilizer never changes the verdict.
        for (const auto& face : faces) {
            auto flipped = residual;
            for (const auto& q : face) flipped[size_t(lattice.qubit_id(q))] ^= 1;
            ASSERT_TRUE(syndrome_is_clear(lattice, flipped));
            EXPECT_EQ(logical_failure(lattice, flipped), with_logical);
        }
    }
}
