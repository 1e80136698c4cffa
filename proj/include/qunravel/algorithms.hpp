#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qunravel/channels.hpp"
#include "qunravel/rng.hpp"
#include "qunravel/sampling.hpp"

namespace qunravel {

enum class Mode { exact, sampled };

struct UnravelParams {
    // Lower bound on every nonzero chi_1 value the algorithms probe.
    double chi_min = 0.1;
    double kappa0 = 0.05;
    Mode mode = Mode::exact;
    // Largest input or output subset allowed in one step.
    int c = 1;
    std::optional<double> delta;
    std::optional<double> eps;
    // Upper bound on the Kraus rank of the process.
    std::optional<int> rank_bound;
    double eta_max = 1e-2;
    // Screen every accepted last tooth with the low-rank certificate.
    bool certify = false;
    // Rank allowed by the certificate; defaults to d_A * rank_bound (rank_bound = 1 if absent).
    std::optional<int> cert_rank;
    // Factorization tolerance in exact mode.
    double tol = kFactorTol;
    std::uint64_t seed = 0;
};

// Thresholds actually used by a run.
struct Calibration {
    double delta = 0.0;
    double eps = 0.0;
    double kappa = 0.0;
    std::int64_t swap_runs = 0;
    int d_A = 1;
    int n = 0;
    int cert_rank = 1;
};

struct CertificateEntry {
    int k = 0;
    double eta = 0.0;
    int r = 0;
};

using RankCertificate = std::vector<CertificateEntry>;

// Diagnostics of one last-tooth test.
struct CheckRecord {
    Labels P;
    Labels Q;
    bool passed = false;
    // SWAP estimates of Tr[C1^2], Tr[C2^2], Tr[C1 C2] and their true values.
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0;
    // p1 + p2 - 2 p3 in sampled mode, the trace-norm residual in exact mode.
    double statistic = 0.0;
    // True trace distance between the two compared states.
    double chi = 0.0;
    // Rank of Tr_Q[C].
    int rank = 0;
    bool within_eps = true;
};

struct IndMatrix {
    std::vector<std::vector<bool>> ind;
    std::vector<std::vector<double>> chi_hat;
    double chi_minus = 0.0;
};

struct UnravelResult {
    std::string algorithm;
    Unravelling unravelling;
    Mode mode = Mode::exact;
    std::int64_t queries = 0;
    std::int64_t checks = 0;
    std::vector<std::string> warnings;
    RankCertificate certificate;
    std::optional<double> error_bound;
    std::optional<Calibration> calibration;
    std::optional<IndMatrix> ind;
    // Rows of the outcome matrix for local algorithms; absent in the exact-probability limit.
    std::optional<std::int64_t> rows;
    std::vector<CheckRecord> trace;
};

// Resolves delta, eps and kappa for process `p` from the parameters.
Calibration calibrate(const UnravelParams& params, const ProcessMatrix& p);

// Query access to a process: exact marginals or simulated SWAP tests with a query counter.
class ProcessOracle {
public:
    ProcessOracle(const UnravelParams& params, const Calibration& cal);

    CheckRecord check_last(const ProcessMatrix& p, const Labels& P, const Labels& Q);

    std::int64_t queries() const { return queries_; }
    std::int64_t checks() const { return checks_; }

private:
    Mode mode_;
    double tol_;
    Calibration cal_;
    Rng rng_;
    std::int64_t queries_ = 0;
    std::int64_t checks_ = 0;
};

CheckRecord check_last(const ProcessMatrix& p, const Labels& P, const Labels& Q, const UnravelParams& params);

UnravelResult unravel_recursive(const ProcessMatrix& p, UnravelParams params);
UnravelResult unravel_general_c(const ProcessMatrix& p, const UnravelParams& params);

bool check_rank_certificate(const LabelledMatrix& marginal, double eta_max, int r_max);
double error_bound_approximate(const RankCertificate& cert, int m);

// Linear-inversion estimate of chi_1 from paired outcome columns.
double estimate_chi1(std::span<const std::uint16_t> a, std::span<const std::uint16_t> b, const Povm& povm_a,
                     const Povm& povm_b);
// Same estimate from a table of joint frequencies, p_hat[a * |povm_b| + b].
double estimate_chi1_from_frequencies(const std::vector<double>& p_hat, const Povm& povm_a, const Povm& povm_b);

// Default local measurements: qubit SIC or a random IC-POVM per wire.
std::pair<std::vector<Povm>, std::vector<Povm>> default_povms(const ProcessMatrix& p, Rng& rng);

// All-pairs independence table. With `n_rows` absent the exact cell
// probabilities are used in place of frequencies.
IndMatrix independence_matrix(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_minus, Rng& rng,
                              int threads = 1);
IndMatrix independence_matrix(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                              const std::vector<Povm>& out_povms, std::optional<std::int64_t> n_rows,
                              double chi_minus, Rng& rng, int threads = 1);

// Per-pair sample count from the all-pairs error bound at accuracy eps0 and
// confidence kappa0, with the wire dimensions maximized over the process.
std::int64_t local_sample_count(const ProcessMatrix& p, double eps0, double kappa0);
// The constant xi of the pairwise error bound for given POVM frame floors.
double xi_constant(int d_a, int d_b, double lambda_a, double lambda_b);

UnravelResult unravel_total_order(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_min,
                                  Rng& rng, int threads = 1);
UnravelResult unravel_memoryless(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_minus,
                                 Rng& rng, int threads = 1);
// Comparison process for a memoryless result: correlated pairs keep their
// two-wire marginal, the other outputs become constant channels.
ProcessMatrix memoryless_comparison(const ProcessMatrix& p, const UnravelResult& result);

}  // namespace qunravel
