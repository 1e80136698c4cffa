#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qunravel/synth.hpp"

using namespace qunravel;
using namespace fixtures;

TEST(Haar, UnitaryAndIsometry) {
    Rng rng(1);
    Matrix u = haar_unitary(4, rng);
    EXPECT_LT((u.adjoint() * u - Matrix::Identity(4, 4)).norm(), 1e-12);
    Matrix v = haar_isometry(6, 2, rng);
    EXPECT_LT((v.adjoint() * v - Matrix::Identity(2, 2)).norm(), 1e-12);
    check_kraus_completeness(random_kraus(3, 2, 3, rng), 2);
    Matrix rho = random_state(3, 2, rng);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    EXPECT_EQ(matrix_rank(LabelledMatrix(rho, Wires{{"x", 3, Direction::input}})), 2);
}

TEST(RandomComb, SingleToothUnitary) {
    Rng rng(2);
    SynthSpec spec;
    spec.n = 1;
    auto s = random_comb(spec, rng);
    EXPECT_EQ(s.kraus_rank, 1);
    EXPECT_EQ(s.truth.steps.size(), 1u);
}

TEST(RandomComb, RankOneChain) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto s = random_comb(SynthSpec{}, rng);
        EXPECT_EQ(s.kraus_rank, 1);
        EXPECT_TRUE(comb_membership(s.process, s.truth));
        EXPECT_GE(s.chi_min_achieved, 0.1);
    }
}

TEST(RandomComb, EnvironmentBoundsRank) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        SynthSpec spec;
        spec.d_env = 2;
        auto s = random_comb(spec, rng);
        EXPECT_LE(s.kraus_rank, 2);
        EXPECT_TRUE(comb_membership(s.process, s.truth));
        for (double v : probed_chi_values(s.process, s.truth)) EXPECT_TRUE(v <= kZeroChi || v >= spec.chi_min_target);
    }
}

TEST(RandomComb, Deterministic) {
    Rng a(3), b(3);
    SynthSpec spec;
    spec.d_env = 2;
    auto x = random_comb(spec, a), y = random_comb(spec, b);
    EXPECT_EQ(x.process.choi.entries, y.process.choi.entries);
    EXPECT_EQ(x.truth, y.truth);
}

TEST(RandomComb, UnreachableTargetFails) {
    Rng rng(4);
    SynthSpec spec;
    spec.chi_min_target = 1.99;
    spec.d_env = 2;
    EXPECT_THROW(random_comb(spec, rng), GenerationError);
}

TEST(Memoryless, ProductWithHiddenPermutation) {
    Rng rng(5);
    auto s = random_memoryless(3, 2, rng);
    EXPECT_TRUE(comb_membership(s.process, s.truth));
    for (const auto& step : s.truth.steps) EXPECT_GT(chi1(s.process, step.inputs, step.outputs), 0.1);
    Rng one(6);
    EXPECT_EQ(random_memoryless(1, 2, one).truth.steps.size(), 1u);
}

TEST(TotalOrder, FirstInputSignalsToLastOutput) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        auto s = total_order_chain(2, 2, rng, 0.1);
        EXPECT_GE(chi1(s.process, s.truth.steps[0].inputs, s.truth.steps[1].outputs), 0.1);
        EXPECT_TRUE(comb_membership(s.process, s.truth));
    }
    Rng rng(9);
    EXPECT_EQ(total_order_chain(1, 2, rng, 0.1).truth.steps.size(), 1u);
    EXPECT_THROW(total_order_chain(2, 1, rng, 0.1), std::invalid_argument);
}

TEST(Entangling, TruthPassesMembership) {
    Rng rng(7);
    SynthSpec spec;
    spec.d_env = 2;
    auto s = entangling_c2(spec, rng);
    EXPECT_TRUE(comb_membership(s.process, s.truth));
    EXPECT_EQ(s.truth.steps[0].inputs.size(), 2u);
}

TEST(Shuffle, PreservesChiAndRoundTrips) {
    Rng rng(8);
    SynthSpec spec;
    spec.d_env = 2;
    auto s = random_comb(spec, rng);
    auto sh = shuffle_wires(s.process, rng);
    EXPECT_NO_THROW(validate_process(sh.process));
    EXPECT_TRUE(comb_membership(sh.process, relabel(s.truth, sh.names)));
    for (const auto& a : s.process.input_labels())
        for (const auto& b : s.process.output_labels())
            EXPECT_NEAR(chi1(s.process, {a}, {b}), chi1(sh.process, {sh.names.at(a)}, {sh.names.at(b)}), 1e-10);
    // Undo the shuffle.
    std::map<std::string, std::string> back;
    for (const auto& [old_label, new_label] : sh.names) back[new_label] = old_label;
    auto restored = canonicalize(reorder_process(sh.process, sh.process.input_labels(), sh.process.output_labels(), back));
    EXPECT_EQ(restored.choi.entries, s.process.choi.entries);
}

TEST(Shuffle, IdentityPermutationIsNoOp) {
    auto p = identity_pair();
    auto q = reorder_process(p, p.input_labels(), p.output_labels());
    EXPECT_EQ(q.choi.entries, p.choi.entries);
}
