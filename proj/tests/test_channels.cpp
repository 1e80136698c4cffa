#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "qunravel/synth.hpp"

using namespace qunravel;
using namespace fixtures;

TEST(Choi, IdentityChannelIsBellState) {
    auto p = identity_channel();
    EXPECT_LT((p.choi.entries - oracle::bell()).norm(), 1e-15);
    EXPECT_EQ(p.choi.labels(), (Labels{"A1", "B1"}));
}

TEST(Choi, Dephasing) {
    Matrix k0 = Matrix::Zero(2, 2), k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k1(1, 1) = 1.0;
    auto p = choi_from_kraus({k0, k1}, ins(1), outs(1));
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(3, 3) = 0.5;
    EXPECT_LT((p.choi.entries - expected).norm(), 1e-15);
    EXPECT_EQ(kraus_rank(p), 2);
}

TEST(Choi, FullDepolarizing) {
    const double p = 1.0;
    std::vector<Matrix> k{std::sqrt(1 - 3 * p / 4) * oracle::pauli(0), std::sqrt(p / 4) * oracle::pauli(1),
                          std::sqrt(p / 4) * oracle::pauli(2), std::sqrt(p / 4) * oracle::pauli(3)};
    auto proc = choi_from_kraus(k, ins(1), outs(1));
    EXPECT_LT((proc.choi.entries - Matrix::Identity(4, 4) / 4.0).norm(), 1e-15);
    EXPECT_EQ(kraus_rank(proc), 4);
    EXPECT_EQ(kraus_rank(identity_channel()), 1);
}

TEST(Choi, MatchesNaiveAssembly) {
    std::mt19937_64 gen(20);
    Rng rng(20);
    for (int trial = 0; trial < 10; ++trial) {
        auto kraus = random_kraus(3, 2, 2, rng);
        auto p = choi_from_kraus(kraus, Wires{{"A1", 2, Direction::input}}, Wires{{"B1", 3, Direction::output}});
        EXPECT_LT((p.choi.entries - oracle::choi(kraus, 2)).norm(), 1e-13);
    }
}

TEST(Choi, ValidationRejectsBadMatrices) {
    Matrix bad = oracle::bell();
    bad(0, 0) = -0.5;
    bad(3, 3) = 1.5;
    EXPECT_THROW(make_process(bad, ins(1), outs(1)), NotPsdError);
    Matrix not_tp = Matrix::Zero(4, 4);
    not_tp(0, 0) = 1.0;  // |0><0| on the input side only
    EXPECT_THROW(make_process(not_tp, ins(1), outs(1)), Error);
    EXPECT_THROW(make_process(Matrix::Identity(3, 3) / 3.0, ins(1), outs(1)), DimensionError);
}

TEST(Choi, KrausRoundTrip) {
    Rng rng(21);
    auto p = choi_from_kraus(random_kraus(4, 4, 3, rng), ins(2), outs(2));
    auto k = kraus_from_choi(p);
    EXPECT_EQ(k.size(), 3u);
    check_kraus_completeness(k, 4);
    EXPECT_LT((choi_from_kraus(k, ins(2), outs(2)).choi.entries - p.choi.entries).norm(), 1e-12);
}

TEST(Choi, IncompleteKrausRejected) {
    Matrix k = Matrix::Identity(2, 2) * 0.5;
    EXPECT_THROW(check_kraus_completeness({k}, 2), Error);
}

TEST(Comb, TwoIdentityTeeth) {
    Tooth t1{{Matrix::Identity(2, 2)}, {{"A1", 2, Direction::input}}, {{"B1", 2, Direction::output}}, 1, 1};
    Tooth t2{{Matrix::Identity(2, 2)}, {{"A2", 2, Direction::input}}, {{"B2", 2, Direction::output}}, 1, 1};
    auto p = compose_comb(Comb{{t1, t2}});
    EXPECT_LT((p.choi.entries - identity_pair().choi.entries).norm(), 1e-14);
    EXPECT_EQ(kraus_rank(p), 1);
}

TEST(Comb, CnotTooth) {
    Tooth t{{oracle::cnot()}, ins(2), outs(2), 1, 1};
    auto p = compose_comb(Comb{{t}});
    EXPECT_LT((p.choi.entries - oracle::choi({oracle::cnot()}, 4)).norm(), 1e-14);
    EXPECT_EQ(kraus_rank(p), 1);
}

TEST(Comb, SwapAcrossTeethMatchesClosedForm) {
    auto p = canonicalize(compose_comb(swap_across_teeth()));
    // Wires A1, A2, B1, B2: Phi+ on (A1, B2), I/2 on A2, |0><0| on B1.
    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    Matrix ref = oracle::kron(oracle::kron(oracle::bell(), Matrix::Identity(2, 2) / 2.0), zero);  // A1 B2 A2 B1
    ref = oracle::permute(ref, {2, 2, 2, 2}, {0, 2, 3, 1});
    EXPECT_LT((p.choi.entries - ref).norm(), 1e-14);
    EXPECT_EQ(kraus_rank(p), 2);
    // A1 signals only to B2. Any candidate last step that keeps A1 and B2 together passes,
    // and one that takes A1 while leaving B2 behind fails.
    EXPECT_TRUE(is_last_tooth_exact(p, {"A2"}, {"B1"}));
    EXPECT_TRUE(is_last_tooth_exact(p, {"A1"}, {"B2"}));
    EXPECT_TRUE(is_last_tooth_exact(p, {"A2"}, {"B2"}));
    EXPECT_FALSE(is_last_tooth_exact(p, {"A1"}, {"B1"}));
}

TEST(Comb, ComposedProcessesAreValid) {
    Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        SynthSpec spec;
        spec.d_env = 2;
        spec.chi_min_target = 0.0;
        auto s = random_comb(spec, rng);
        EXPECT_NO_THROW(validate_process(s.process));
        EXPECT_TRUE(comb_membership(s.process, s.truth));
    }
}

TEST(Canonical, NaturalLabelOrder) {
    Tooth t1{{Matrix::Identity(2, 2)}, {{"A10", 2, Direction::input}}, {{"B10", 2, Direction::output}}, 1, 1};
    Tooth t2{{Matrix::Identity(2, 2)}, {{"A2", 2, Direction::input}}, {{"B2", 2, Direction::output}}, 1, 1};
    auto p = canonicalize(compose_comb(Comb{{t1, t2}}));
    EXPECT_EQ(p.input_labels(), (Labels{"A2", "A10"}));
    EXPECT_EQ(p.output_labels(), (Labels{"B2", "B10"}));
    EXPECT_NO_THROW(validate_process(p));
}

TEST(Chi1, Examples) {
    EXPECT_NEAR(chi1(identity_pair(), {"A1", "B1"}, {"A2", "B2"}), 0.0, 1e-14);
    EXPECT_NEAR(chi1(identity_channel(), {"A1"}, {"B1"}), 1.5, 1e-14);
    EXPECT_THROW(chi1(identity_channel(), {"A1"}, {}), std::invalid_argument);
    EXPECT_THROW(chi1(identity_channel(), {"A1"}, {"A1"}), LabelError);
}

TEST(Chi1, Symmetric) {
    Rng rng(23);
    auto p = choi_from_kraus(random_kraus(4, 4, 2, rng), ins(2), outs(2));
    EXPECT_NEAR(chi1(p, {"A1", "B2"}, {"B1"}), chi1(p, {"B1"}, {"A1", "B2"}), 1e-10);
    EXPECT_NEAR(chi1(p, {"A2"}, {"A1", "B1"}), chi1(p, {"A1", "B1"}, {"A2"}), 1e-10);
}

TEST(LastTooth, IdentityPair) {
    EXPECT_TRUE(is_last_tooth_exact(identity_pair(), {"A1"}, {"B1"}));
    EXPECT_FALSE(is_last_tooth_exact(identity_pair(), {"A1"}, {"B2"}));
}

TEST(LastTooth, Cnot) {
    EXPECT_FALSE(is_last_tooth_exact(cnot_process(), {"A2"}, {"B2"}));
    EXPECT_TRUE(is_last_tooth_exact(cnot_process(), {"A1", "A2"}, {"B1", "B2"}));
}

TEST(Reduce, IdentityPairLeavesIdentity) {
    auto r = reduce_channel(identity_pair(), {"A2"}, {"B2"});
    EXPECT_LT((r.choi.entries - oracle::bell()).norm(), 1e-14);
    EXPECT_EQ(r.input_labels(), (Labels{"A1"}));
}

TEST(Reduce, OnlyPairGivesScalar) {
    auto r = reduce_channel(identity_channel(), {"A1"}, {"B1"});
    EXPECT_EQ(r.choi.dim(), 1);
    EXPECT_NEAR(r.choi.entries(0, 0).real(), 1.0, 1e-14);
}

TEST(Reduce, CnotDephasesControl) {
    auto r = reduce_channel(cnot_process(), {"A2"}, {"B2"});
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = expected(3, 3) = 0.5;
    EXPECT_LT((r.choi.entries - expected).norm(), 1e-14);
}

TEST(Membership, IdentityPairEitherOrder) {
    EXPECT_TRUE(comb_membership(identity_pair(), order({{{"A1"}, {"B1"}}, {{"A2"}, {"B2"}}})));
    EXPECT_TRUE(comb_membership(identity_pair(), order({{{"A2"}, {"B2"}}, {{"A1"}, {"B1"}}})));
}

TEST(Membership, SwapAcrossTeethWrongOrder) {
    auto p = canonicalize(compose_comb(swap_across_teeth()));
    EXPECT_TRUE(comb_membership(p, order({{{"A1"}, {"B1"}}, {{"A2"}, {"B2"}}})));
    auto m = comb_membership_trace(p, order({{{"A2"}, {"B2"}}, {{"A1"}, {"B1"}}}));
    EXPECT_FALSE(m.member);
    EXPECT_EQ(m.failing_step, 1);
    EXPECT_GT(m.residuals[1], 0.5);
}

TEST(Membership, TrivialPartitionAlwaysHolds) {
    Rng rng(24);
    auto p = choi_from_kraus(random_kraus(8, 8, 3, rng), ins(3), outs(3));
    EXPECT_TRUE(comb_membership(p, order({{{"A1", "A2", "A3"}, {"B1", "B2", "B3"}}})));
}

TEST(Membership, RejectsNonPartition) {
    EXPECT_THROW(validate_unravelling(identity_pair(), order({{{"A1"}, {"B1"}}})), LabelError);
    EXPECT_THROW(validate_unravelling(identity_pair(), order({{{"A1"}, {"B1"}}, {{"A1"}, {"B2"}}})), LabelError);
}

TEST(Reorder, ChiInvariantUnderRelabel) {
    Rng rng(25);
    auto p = choi_from_kraus(random_kraus(4, 4, 2, rng), ins(2), outs(2));
    auto q = reorder_process(p, {"A2", "A1"}, {"B2", "B1"}, {{"A1", "X"}, {"B2", "Y"}});
    EXPECT_NEAR(chi1(p, {"A1"}, {"B2", "A2"}), chi1(q, {"X"}, {"Y", "A2"}), 1e-12);
    EXPECT_NO_THROW(validate_process(q));
}

TEST(Standardize, PadsToMaxDimension) {
    Rng rng(26);
    Wires in{{"A1", 2, Direction::input}, {"A2", 3, Direction::input}};
    Wires out{{"B1", 3, Direction::output}, {"B2", 2, Direction::output}};
    auto p = choi_from_kraus(random_kraus(6, 6, 1, rng), in, out);
    auto s = standardize(p);
    EXPECT_NO_THROW(validate_process(s));
    for (const auto& w : s.inputs) EXPECT_EQ(w.dim, 3);
    for (const auto& w : s.outputs) EXPECT_EQ(w.dim, 3);
    EXPECT_GE(kraus_rank(s), kraus_rank(p));
}

TEST(CombRank, ReducedRankBound) {
    Rng rng(27);
    for (int trial = 0; trial < 20; ++trial) {
        SynthSpec spec;
        spec.n = 2;
        spec.d_env = 2;
        spec.chi_min_target = 0.0;
        auto s = random_comb(spec, rng);
        const auto& last = s.truth.steps.back();
        auto reduced = reduce_channel(s.process, last.inputs, last.outputs);
        EXPECT_LE(kraus_rank(reduced), kraus_rank(s.process) * 2 / 2);
    }
}
