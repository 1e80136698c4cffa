#pragma once

#include <string>
#include <vector>

#include "qunravel/tensor.hpp"

namespace qunravel {

// Default tolerance for exact factorization checks.
inline constexpr double kFactorTol = 1e-8;
// Tolerance for the channel invariants (unit trace, trace preservation).
inline constexpr double kChannelTol = 1e-9;

// Choi state of a channel, normalized to unit trace. The choi wires are the
// inputs followed by the outputs.
struct ProcessMatrix {
    LabelledMatrix choi;
    Wires inputs;
    Wires outputs;

    Eigen::Index d_in() const { return total_dim(inputs); }
    Eigen::Index d_out() const { return total_dim(outputs); }
    Labels input_labels() const { return labels_of(inputs); }
    Labels output_labels() const { return labels_of(outputs); }
    // Largest wire dimension over inputs and outputs (1 for a scalar process).
    int max_dim() const;
};

// One interaction of a comb. Kraus operators map (in_wires, mem_in) to
// (out_wires, mem_out), with the memory as the last factor on both sides.
struct Tooth {
    std::vector<Matrix> kraus;
    Wires in_wires;
    Wires out_wires;
    int mem_in = 1;
    int mem_out = 1;
};

struct Comb {
    std::vector<Tooth> teeth;

    int d_env() const { return teeth.empty() ? 1 : teeth.back().mem_out; }
};

struct Step {
    Labels inputs;
    Labels outputs;

    bool operator==(const Step&) const = default;
};

// Ordered causal unravelling; the first step acts first.
struct Unravelling {
    std::vector<Step> steps;

    bool operator==(const Unravelling&) const = default;
};

struct MembershipResult {
    bool member = true;
    // Residual trace norm of each tested step, indexed like Unravelling::steps.
    // Entry 0 is never tested and stays 0.
    std::vector<double> residuals;
    // Index of the first failing step, or -1.
    int failing_step = -1;
};

Wires make_wires(const std::string& prefix, int count, int dim, Direction direction, int first_index = 1);

// Assembles a process and checks PSD, unit trace and trace preservation.
ProcessMatrix make_process(Matrix choi, Wires inputs, Wires outputs, double tol = kChannelTol);
void validate_process(const ProcessMatrix& p, double tol = kChannelTol);

// Kraus operators map the tensor product of `inputs` to that of `outputs`.
ProcessMatrix choi_from_kraus(const std::vector<Matrix>& kraus, const Wires& inputs, const Wires& outputs);
// Kraus operators from the eigendecomposition of the Choi state.
std::vector<Matrix> kraus_from_choi(const ProcessMatrix& p, double rel_tol = kRankRelTol);
// Throws unless sum K^dagger K equals the identity within `tol`.
void check_kraus_completeness(const std::vector<Matrix>& kraus, Eigen::Index d_in, double tol = kChannelTol);

// Overall process of a comb, wires listed in tooth order.
ProcessMatrix compose_comb(const Comb& comb);
// Reorders inputs and outputs by natural label order.
ProcessMatrix canonicalize(const ProcessMatrix& p);
// Relabels and reorders wires: `input_order`/`output_order` list old labels in
// their new positions; `names` maps old labels to new ones.
ProcessMatrix reorder_process(const ProcessMatrix& p, const Labels& input_order, const Labels& output_order,
                              const std::map<std::string, std::string>& names = {});

double chi1(const ProcessMatrix& p, const Labels& s, const Labels& t);

// The two states compared by the last-tooth test, on the wires outside Q:
// first = Tr_Q[C], second = I_P/d_P tensor Tr_{P,Q}[C].
std::pair<LabelledMatrix, LabelledMatrix> last_tooth_states(const ProcessMatrix& p, const Labels& P, const Labels& Q);
double last_tooth_residual(const ProcessMatrix& p, const Labels& P, const Labels& Q);
bool is_last_tooth_exact(const ProcessMatrix& p, const Labels& P, const Labels& Q, double tol = kFactorTol);

// Feeds the maximally mixed state into P and discards Q.
ProcessMatrix reduce_channel(const ProcessMatrix& p, const Labels& P, const Labels& Q);

// Throws LabelError unless the steps partition the process wires.
void validate_unravelling(const ProcessMatrix& p, const Unravelling& u);
MembershipResult comb_membership_trace(const ProcessMatrix& p, const Unravelling& u, double tol = kFactorTol);
bool comb_membership(const ProcessMatrix& p, const Unravelling& u, double tol = kFactorTol);

int kraus_rank(const ProcessMatrix& p);

// Embeds every wire into dimension max_dim by zero-padding Kraus operators.
// Input levels outside the original space are sent to the all-zero output
// state by extra Kraus operators, so the Kraus rank may grow.
ProcessMatrix standardize(const ProcessMatrix& p);

}  // namespace qunravel
