#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "qunravel/algorithms.hpp"
#include "qunravel/synth.hpp"

using namespace qunravel;
using namespace fixtures;

namespace {

// All c = 1 unravellings of an n-in/n-out process that pass membership.
std::vector<Unravelling> brute_force_unravellings(const ProcessMatrix& p) {
    Labels in = p.input_labels(), out = p.output_labels();
    std::sort(in.begin(), in.end());
    std::vector<Unravelling> valid;
    do {
        Labels o = out;
        std::sort(o.begin(), o.end());
        do {
            Unravelling u;
            for (size_t k = 0; k < in.size(); ++k) u.steps.push_back({{in[k]}, {o[k]}});
            if (comb_membership(p, u)) valid.push_back(u);
        } while (std::next_permutation(o.begin(), o.end()));
    } while (std::next_permutation(in.begin(), in.end()));
    return valid;
}

SynthSpec chain_spec(int n, int d_env, std::uint64_t seed) {
    SynthSpec s;
    s.n = n;
    s.d_env = d_env;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(CheckLast, ExactExamples) {
    UnravelParams params;
    EXPECT_TRUE(check_last(identity_pair(), {"A1"}, {"B1"}, params).passed);
    EXPECT_FALSE(check_last(cnot_process(), {"A2"}, {"B2"}, params).passed);
    EXPECT_THROW(check_last(cnot_process(), {"A1", "A2"}, {"B1"}, params), std::invalid_argument);
}

TEST(CheckLast, SampledCalibration) {
    UnravelParams params;
    params.mode = Mode::sampled;
    params.chi_min = 0.5;
    params.rank_bound = 1;
    auto cal = calibrate(params, identity_pair());
    EXPECT_DOUBLE_EQ(cal.delta, 0.015625);
    EXPECT_DOUBLE_EQ(cal.eps, 0.003125);
    EXPECT_DOUBLE_EQ(cal.kappa, 0.05 / (3 * 8));
    EXPECT_EQ(cal.swap_runs, swap_test_runs(cal.eps, cal.kappa));
    params.seed = 3;
    EXPECT_TRUE(check_last(identity_pair(), {"A1"}, {"B1"}, params).passed);
    EXPECT_FALSE(check_last(identity_pair(), {"A1"}, {"B2"}, params).passed);
}

TEST(Calibrate, ApproximateRecipeWithoutRankBound) {
    UnravelParams params;
    params.mode = Mode::sampled;
    params.eta_max = 0.05;
    auto cal = calibrate(params, identity_pair());
    EXPECT_DOUBLE_EQ(cal.delta, 2 * 0.05 * 0.05);
    EXPECT_DOUBLE_EQ(cal.eps, cal.delta / 4);
    // sqrt(delta + 4 eps) = 2 eta_max
    EXPECT_NEAR(std::sqrt(cal.delta + 4 * cal.eps), 2 * params.eta_max, 1e-15);
}

TEST(Calibrate, GeneralCKappa) {
    UnravelParams params;
    params.c = 2;
    auto cal = calibrate(params, cnot_process());
    EXPECT_DOUBLE_EQ(cal.kappa, 0.05 / (3 * std::pow(2.0, 5)));
}

TEST(Recursive, SinglePairBaseCase) {
    auto r = unravel_recursive(identity_channel(), {});
    ASSERT_EQ(r.unravelling.steps.size(), 1u);
    EXPECT_EQ(r.unravelling.steps[0], (Step{{"A1"}, {"B1"}}));
    EXPECT_EQ(r.queries, 0);
}

TEST(Recursive, ExactChainsPassMembership) {
    for (int d_env : {1, 2}) {
        for (std::uint64_t seed = 0; seed < 25; ++seed) {
            Rng rng(seed);
            auto s = random_comb(chain_spec(3, d_env, seed), rng);
            auto r = unravel_recursive(s.process, {});
            EXPECT_TRUE(comb_membership(s.process, r.unravelling)) << seed;
            EXPECT_TRUE(r.warnings.empty());
        }
    }
}

TEST(Recursive, CnotGivesTrivialStep) {
    auto r = unravel_recursive(cnot_process(), {});
    ASSERT_EQ(r.unravelling.steps.size(), 1u);
    EXPECT_EQ(r.unravelling.steps[0], (Step{{"A1", "A2"}, {"B1", "B2"}}));
    EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Recursive, SwapAcrossTeeth) {
    auto p = canonicalize(compose_comb(swap_across_teeth()));
    auto r = unravel_recursive(p, {});
    // The lexicographic scan tries (A1, B1) first, which fails, then accepts (A1, B2) as last.
    EXPECT_EQ(r.unravelling, order({{{"A2"}, {"B1"}}, {{"A1"}, {"B2"}}}));
    EXPECT_TRUE(comb_membership(p, r.unravelling));
}

TEST(Recursive, OutputIsAmongBruteForceUnravellings) {
    for (int n : {2, 3, 4}) {
        const int seeds = n == 4 ? 2 : 8;
        for (int seed = 0; seed < seeds; ++seed) {
            Rng rng(static_cast<std::uint64_t>(100 + seed));
            auto s = random_comb(chain_spec(n, 2, 0), rng);
            auto valid = brute_force_unravellings(s.process);
            auto r = unravel_recursive(s.process, {});
            EXPECT_NE(std::find(valid.begin(), valid.end(), r.unravelling), valid.end()) << n << " " << seed;
            EXPECT_NE(std::find(valid.begin(), valid.end(), s.truth), valid.end());
        }
    }
}

TEST(Recursive, SampledQueryCountIsExact) {
    Rng rng(5);
    auto s = random_comb(chain_spec(2, 2, 5), rng);
    UnravelParams params;
    params.mode = Mode::sampled;
    params.chi_min = 0.2;
    params.rank_bound = 1;
    params.seed = 9;
    auto r = unravel_recursive(s.process, params);
    const auto& cal = *r.calibration;
    EXPECT_EQ(r.queries, 6 * cal.swap_runs * r.checks);
    EXPECT_LE(r.queries, 3 * 8 * cal.swap_runs);
    // Same seed, same result.
    auto again = unravel_recursive(s.process, params);
    EXPECT_EQ(again.unravelling, r.unravelling);
    EXPECT_EQ(again.queries, r.queries);
}

TEST(Recursive, AcceptedSampledChecksAreClose) {
    // An accepted check whose three estimates are within eps certifies chi <= sqrt(delta + 4 eps) in HS norm.
    UnravelParams params;
    params.mode = Mode::sampled;
    params.chi_min = 0.3;
    params.rank_bound = 1;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto s = random_comb(chain_spec(2, 2, seed), rng);
        params.seed = seed;
        auto r = unravel_recursive(s.process, params);
        const auto& cal = *r.calibration;
        for (const auto& rec : r.trace) {
            if (rec.passed && rec.within_eps) {
                const double hs2 = rec.t1 + rec.t2 - 2 * rec.t3;
                EXPECT_LE(hs2, cal.delta + 4 * cal.eps + 1e-12);
            }
        }
    }
}

TEST(GeneralC, CnotWithCapTwo) {
    UnravelParams params;
    params.c = 2;
    auto r = unravel_general_c(cnot_process(), params);
    EXPECT_EQ(r.unravelling, order({{{"A1", "A2"}, {"B1", "B2"}}}));
    EXPECT_TRUE(r.warnings.empty());
}

TEST(GeneralC, EntanglingToothThenSingleTooth) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(seed);
        SynthSpec spec;
        spec.d_env = 2;
        spec.family = Family::entangling_c2;
        auto s = entangling_c2(spec, rng);
        UnravelParams params;
        params.c = 2;
        auto r = unravel_general_c(s.process, params);
        EXPECT_EQ(r.unravelling, s.truth) << seed;
        EXPECT_TRUE(comb_membership(s.process, r.unravelling));
    }
}

TEST(GeneralC, CapOneMatchesRecursive) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        auto s = random_comb(chain_spec(3, 2, seed), rng);
        UnravelParams params;
        params.c = 1;
        EXPECT_EQ(unravel_general_c(s.process, params).unravelling, unravel_recursive(s.process, params).unravelling);
    }
}

TEST(Certificate, RankChecks) {
    Wires w{{"a", 2, Direction::input}, {"b", 2, Direction::input}};
    LabelledMatrix pure(oracle::bell(), w);
    EXPECT_TRUE(check_rank_certificate(pure, 0.0, 1));
    Matrix d = Matrix::Zero(4, 4);
    d.diagonal() << 0.7, 0.2, 0.1, 0.0;
    LabelledMatrix lm(d, w);
    EXPECT_TRUE(check_rank_certificate(lm, 0.12, 2));
    EXPECT_FALSE(check_rank_certificate(lm, 0.12, 1));
    Wires w16{{"a", 4, Direction::input}, {"b", 4, Direction::input}};
    EXPECT_FALSE(check_rank_certificate(maximally_mixed(w16), 0.0, 4));
}

TEST(Certificate, ErrorBoundArithmetic) {
    EXPECT_DOUBLE_EQ(error_bound_approximate({{1, 0.0, 1}, {2, 0.0, 1}}, 3), 0.0);
    EXPECT_NEAR(error_bound_approximate({{1, 0.01, 1}}, 3), 8 * std::sqrt(2.0) * 3 * 0.1, 1e-12);
    EXPECT_NEAR(error_bound_approximate({{1, 0.01, 1}}, 3), 3.394, 1e-3);
    const double base = error_bound_approximate({{1, 0.01, 2}}, 3);
    EXPECT_GT(error_bound_approximate({{1, 0.02, 2}}, 3), base);
    EXPECT_GT(error_bound_approximate({{1, 0.01, 3}}, 3), base);
    EXPECT_GT(error_bound_approximate({{1, 0.01, 2}}, 4), base);
}

TEST(Certificate, ExactCombsCertifyWithZeroBound) {
    Rng rng(7);
    auto s = random_comb(chain_spec(3, 1, 7), rng);
    UnravelParams params;
    params.certify = true;
    params.rank_bound = 1;
    auto r = unravel_recursive(s.process, params);
    ASSERT_TRUE(r.error_bound.has_value());
    EXPECT_NEAR(*r.error_bound, 0.0, 1e-6);
    for (const auto& e : r.certificate) EXPECT_LE(e.eta, 1e-12);
}

TEST(Estimate, ExactLimitProductIsZero) {
    Povm sic = build_sic_povm_qubit();
    Wires w{{"a", 2, Direction::input}, {"b", 2, Direction::output}};
    auto dist = product_distribution(maximally_mixed(w), {&sic, &sic});
    EXPECT_NEAR(estimate_chi1_from_frequencies(dist, sic, sic), 0.0, 1e-10);
}

TEST(Estimate, ExactLimitIdentityIsThreeHalves) {
    Povm sic = build_sic_povm_qubit();
    auto dist = outcome_distribution(identity_channel(), {sic}, {sic});
    EXPECT_NEAR(estimate_chi1_from_frequencies(dist, sic, sic), 1.5, 1e-9);
}

TEST(Estimate, ExactLimitMatchesChi1OnQutrits) {
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        Wires in{{"A1", 3, Direction::input}}, out{{"B1", 3, Direction::output}};
        auto p = choi_from_kraus(random_kraus(3, 3, 2, rng), in, out);
        Povm pa = build_ic_povm(3, rng), pb = build_ic_povm(3, rng);
        auto dist = outcome_distribution(p, {pa}, {pb});
        EXPECT_NEAR(estimate_chi1_from_frequencies(dist, pa, pb), chi1(p, {"A1"}, {"B1"}), 1e-9);
    }
}

TEST(Estimate, SampleCountConstants) {
    EXPECT_NEAR(xi_constant(2, 2, 1.0 / 6, 1.0 / 6), 6.014e-3, 1e-6);
    const auto n = local_sample_count(identity_channel(), 0.3, 0.05);
    const double xi = xi_constant(2, 2, 1.0 / 6, 1.0 / 6);
    EXPECT_EQ(n, static_cast<std::int64_t>(std::ceil(std::log(2 * 24 / 0.05) / (2 * xi * xi * 0.09))));
    EXPECT_NEAR(static_cast<double>(n), 1.06e6, 0.01e6);
}

TEST(Independence, IdentityPairExactLimit) {
    Rng rng(9);
    auto ind = independence_matrix(identity_pair(), std::nullopt, 0.5, rng);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            EXPECT_EQ(ind.ind[i][j], i != j);
            EXPECT_NEAR(ind.chi_hat[i][j], i == j ? 1.5 : 0.0, 1e-9);
        }
}

TEST(Independence, ConstantChannelsAllIndependent) {
    Rng rng(10);
    MemorylessOptions opts;
    opts.constant_teeth = {0, 1};
    auto s = random_memoryless(2, 2, rng, opts);
    auto ind = independence_matrix(s.process, std::nullopt, 0.05, rng);
    for (const auto& row : ind.ind)
        for (bool b : row) EXPECT_TRUE(b);
}

TEST(Independence, SampledWithinTolerance) {
    // At local_sample_count rows every estimate is within eps0 w.p. >= 1 - 4 kappa0.
    Rng rng(11);
    auto p = identity_pair();
    const auto n = local_sample_count(p, 0.3, 0.05);
    auto ind = independence_matrix(p, n, 0.75, rng, 4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(ind.chi_hat[i][j], i == j ? 1.5 : 0.0, 0.3);
}

TEST(TotalOrder, SinglePair) {
    Rng rng(12);
    auto r = unravel_total_order(identity_channel(), std::nullopt, 0.1, rng);
    EXPECT_EQ(r.unravelling, order({{{"A1"}, {"B1"}}}));
}

TEST(TotalOrder, RecoversChainOrdering) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng gen(seed);
        auto s = total_order_chain(3, 2, gen, 0.1);
        Rng rng(seed + 1000);
        auto r = unravel_total_order(s.process, std::nullopt, 0.1, rng);
        EXPECT_EQ(r.unravelling, s.truth) << seed;
        EXPECT_TRUE(comb_membership(s.process, r.unravelling));
    }
}

TEST(TotalOrder, TieWarning) {
    Rng rng(13);
    auto r = unravel_total_order(identity_pair(), std::nullopt, 0.1, rng);
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_TRUE(comb_membership(identity_pair(), r.unravelling));
}

TEST(Memoryless, SwapMatching) {
    // Identity channels A1 -> B2 and A2 -> B1.
    Matrix swap = Matrix::Zero(4, 4);
    swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
    auto p = unitary_process(swap, 2);
    Rng rng(14);
    auto r = unravel_memoryless(p, std::nullopt, 0.05, rng);
    EXPECT_EQ(r.unravelling, order({{{"A1"}, {"B2"}}, {{"A2"}, {"B1"}}}));
}

TEST(Memoryless, AllConstantFallsBackToIdentityMatching) {
    Rng rng(15);
    MemorylessOptions opts;
    opts.constant_teeth = {0, 1, 2};
    auto s = random_memoryless(3, 2, rng, opts);
    auto r = unravel_memoryless(s.process, std::nullopt, 0.05, rng);
    EXPECT_EQ(r.unravelling, order({{{"A1"}, {"B1"}}, {{"A2"}, {"B2"}}, {{"A3"}, {"B3"}}}));
    EXPECT_TRUE(comb_membership(s.process, r.unravelling));
}

TEST(Memoryless, MixedConstantTooth) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        MemorylessOptions opts;
        opts.constant_teeth = {1};
        auto s = random_memoryless(3, 2, rng, opts);
        auto r = unravel_memoryless(s.process, std::nullopt, 0.05, rng);
        EXPECT_EQ(r.unravelling.steps[0], s.truth.steps[0]);
        EXPECT_EQ(r.unravelling.steps[2], s.truth.steps[2]);
        EXPECT_TRUE(comb_membership(s.process, r.unravelling));
        auto d = memoryless_comparison(s.process, r);
        EXPECT_LE(trace_norm(s.process.choi.entries - d.choi.entries), 2 * 3 * 0.05 + 1e-9);
    }
}
