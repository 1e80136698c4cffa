#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qunravel/channels.hpp"
#include "qunravel/rng.hpp"

namespace qunravel {

// Measurement on one wire; outcome labels are 1-based positions in `effects`.
struct Povm {
    std::vector<Matrix> effects;

    int dim() const { return effects.empty() ? 0 : static_cast<int>(effects.front().rows()); }
    int size() const { return static_cast<int>(effects.size()); }
};

struct FrameDiagnostics {
    Matrix frame_operator;
    double min_eig = 0.0;
    double max_eig = 0.0;
};

// N rows of outcome indices, one column per wire (inputs then outputs).
struct OutcomeMatrix {
    Wires wires;
    std::vector<Povm> povms;
    std::int64_t rows = 0;
    // Row-major, 0-based outcome indices.
    std::vector<std::uint16_t> data;

    int cols() const { return static_cast<int>(wires.size()); }
    std::uint16_t at(std::int64_t row, int col) const { return data[static_cast<size_t>(row * cols() + col)]; }
    std::vector<std::uint16_t> column(int col) const;
};

// Success probability (1 + Tr[rho sigma]) / 2 of the SWAP test.
double swap_success_probability(const Matrix& rho, const Matrix& sigma);
bool swap_test_sample(const Matrix& rho, const Matrix& sigma, Rng& rng);
// Number of SWAP-test runs ceil(2 eps^-2 ln(2/kappa)).
std::int64_t swap_test_runs(double eps, double kappa);
// Estimate 2 c/N - 1 of Tr[rho sigma] from N runs, where c counts successes.
// The runs are i.i.d. Bernoulli, so c is drawn as one binomial variate.
double swaptest_estimate(const Matrix& rho, const Matrix& sigma, double eps, double kappa, Rng& rng);

void validate_povm(const Povm& povm, double tol = kChannelTol);
Povm build_sic_povm_qubit();
Povm build_ic_povm(int d, Rng& rng);
// SIC for qubits, a random IC-POVM otherwise.
Povm default_povm(int d, Rng& rng);
FrameDiagnostics frame_diagnostics(const Povm& povm);
// Operators D_a with rho = sum_a Tr[P_a rho] D_a for every rho.
std::vector<Matrix> dual_frame(const Povm& povm);

// Distribution of the product measurement of `m` with one POVM per wire, in
// mixed radix with the first wire most significant.
std::vector<double> product_distribution(const LabelledMatrix& m, const std::vector<const Povm*>& povms);
// Cell probabilities Pr(a_1..a_n, b_1..b_n) = Tr[(P tensor Q) C].
std::vector<double> outcome_distribution(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                                         const std::vector<Povm>& out_povms);

// Row r uses substream r of `rng`, so the result does not depend on `threads`.
OutcomeMatrix sample_outcome_matrix(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                                    const std::vector<Povm>& out_povms, std::int64_t n_rows, Rng& rng,
                                    int threads = 1);

}  // namespace qunravel
