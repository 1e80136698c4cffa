#include <algorithm>
#include <cmath>
#include <numeric>

#include "qunravel/algorithms.hpp"

namespace qunravel {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    return tensor_product(LabelledMatrix(a, Wires{{"a", static_cast<int>(a.rows()), Direction::input}}),
                          LabelledMatrix(b, Wires{{"b", static_cast<int>(b.rows()), Direction::output}}))
        .entries;
}

int max_wire_dim(const Wires& wires) {
    int d = 1;
    for (const auto& w : wires) {
        d = std::max(d, w.dim);
    }
    return d;
}

}  // namespace

double estimate_chi1_from_frequencies(const std::vector<double>& p_hat, const Povm& povm_a, const Povm& povm_b) {
    const size_t ma = static_cast<size_t>(povm_a.size());
    const size_t mb = static_cast<size_t>(povm_b.size());
    if (p_hat.size() != ma * mb) {
        throw DimensionError("frequency table does not match the POVM sizes");
    }
    std::vector<Matrix> da = dual_frame(povm_a);
    std::vector<Matrix> db = dual_frame(povm_b);
    const int d_a = povm_a.dim();
    const int d_b = povm_b.dim();
    Matrix rho = Matrix::Zero(d_a * d_b, d_a * d_b);
    for (size_t a = 0; a < ma; ++a) {
        for (size_t b = 0; b < mb; ++b) {
            if (p_hat[a * mb + b] != 0.0) {
                rho += p_hat[a * mb + b] * kron(da[a], db[b]);
            }
        }
    }
    Wires wires{{"a", d_a, Direction::input}, {"b", d_b, Direction::output}};
    LabelledMatrix joint(rho, wires);
    LabelledMatrix ra = partial_trace(joint, {"a"});
    LabelledMatrix rb = partial_trace(joint, {"b"});
    return trace_norm(rho - tensor_product(ra, rb).entries);
}

double estimate_chi1(std::span<const std::uint16_t> a, std::span<const std::uint16_t> b, const Povm& povm_a,
                     const Povm& povm_b) {
    if (a.size() != b.size() || a.empty()) {
        throw DimensionError("outcome columns must be nonempty and of equal length");
    }
    const size_t mb = static_cast<size_t>(povm_b.size());
    std::vector<double> counts(static_cast<size_t>(povm_a.size()) * mb, 0.0);
    for (size_t r = 0; r < a.size(); ++r) {
        counts[a[r] * mb + b[r]] += 1.0;
    }
    for (auto& c : counts) {
        c /= static_cast<double>(a.size());
    }
    return estimate_chi1_from_frequencies(counts, povm_a, povm_b);
}

std::pair<std::vector<Povm>, std::vector<Povm>> default_povms(const ProcessMatrix& p, Rng& rng) {
    std::vector<Povm> in, out;
    std::uint64_t k = 0;
    for (const auto& w : p.inputs) {
        Rng sub = rng.substream(k++);
        in.push_back(default_povm(w.dim, sub));
    }
    for (const auto& w : p.outputs) {
        Rng sub = rng.substream(k++);
        out.push_back(default_povm(w.dim, sub));
    }
    return {std::move(in), std::move(out)};
}

IndMatrix independence_matrix(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                              const std::vector<Povm>& out_povms, std::optional<std::int64_t> n_rows,
                              double chi_minus, Rng& rng, int threads) {
    const size_t n_in = p.inputs.size();
    const size_t n_out = p.outputs.size();
    IndMatrix result;
    result.chi_minus = chi_minus;
    result.ind.assign(n_in, std::vector<bool>(n_out, true));
    result.chi_hat.assign(n_in, std::vector<double>(n_out, 0.0));
    std::optional<OutcomeMatrix> outcomes;
    if (n_rows) {
        outcomes = sample_outcome_matrix(p, in_povms, out_povms, *n_rows, rng, threads);
    }
    for (size_t i = 0; i < n_in; ++i) {
        std::vector<std::uint16_t> col_a;
        if (outcomes) {
            col_a = outcomes->column(static_cast<int>(i));
        }
        for (size_t j = 0; j < n_out; ++j) {
            double chi = 0.0;
            if (outcomes) {
                auto col_b = outcomes->column(static_cast<int>(n_in + j));
                chi = estimate_chi1(col_a, col_b, in_povms[i], out_povms[j]);
            } else {
                LabelledMatrix pair = marginal(p.choi, {p.inputs[i].label, p.outputs[j].label});
                chi = estimate_chi1_from_frequencies(product_distribution(pair, {&in_povms[i], &out_povms[j]}),
                                                     in_povms[i], out_povms[j]);
            }
            result.chi_hat[i][j] = chi;
            result.ind[i][j] = chi <= chi_minus;
        }
    }
    return result;
}

IndMatrix independence_matrix(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_minus, Rng& rng,
                              int threads) {
    Rng povm_rng = rng.substream(0);
    Rng sample_rng = rng.substream(1);
    auto [in, out] = default_povms(p, povm_rng);
    return independence_matrix(p, in, out, n_rows, chi_minus, sample_rng, threads);
}

double xi_constant(int d_a, int d_b, double lambda_a, double lambda_b) {
    const double da2 = static_cast<double>(d_a) * d_a;
    const double db2 = static_cast<double>(d_b) * d_b;
    return std::sqrt(lambda_a * lambda_b) / (std::sqrt(da2 * db2 + 4.0 * db2 + 4.0 * da2) * d_a * d_b);
}

std::int64_t local_sample_count(const ProcessMatrix& p, double eps0, double kappa0) {
    const int d_a = max_wire_dim(p.inputs);
    const int d_b = max_wire_dim(p.outputs);
    // Frame floor 1/(d(d+1)) of a SIC measurement.
    const double xi = xi_constant(d_a, d_b, 1.0 / (d_a * (d_a + 1.0)), 1.0 / (d_b * (d_b + 1.0)));
    const double da2 = static_cast<double>(d_a) * d_a;
    const double db2 = static_cast<double>(d_b) * d_b;
    const double prefactor = 2.0 * (da2 * db2 + da2 + db2);
    return static_cast<std::int64_t>(std::ceil(std::log(prefactor / kappa0) / (2.0 * xi * xi * eps0 * eps0)));
}

UnravelResult unravel_total_order(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_min,
                                  Rng& rng, int threads) {
    const size_t n = p.inputs.size();
    if (p.outputs.size() != n) {
        throw std::invalid_argument("total-order unravelling needs as many outputs as inputs");
    }
    UnravelResult result;
    result.algorithm = "total-order";
    result.mode = n_rows ? Mode::sampled : Mode::exact;
    result.rows = n_rows;
    result.queries = n_rows.value_or(0);
    IndMatrix ind = independence_matrix(p, n_rows, chi_min / 2.0, rng, threads);
    std::vector<int> count_a(n, 0), count_b(n, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (!ind.ind[i][j]) {
                ++count_a[i];
                ++count_b[j];
            }
        }
    }
    std::vector<int> sigma(n), pi(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::iota(pi.begin(), pi.end(), 0);
    std::stable_sort(sigma.begin(), sigma.end(), [&](int x, int y) { return count_a[x] > count_a[y]; });
    std::stable_sort(pi.begin(), pi.end(), [&](int x, int y) { return count_b[x] < count_b[y]; });
    for (size_t k = 1; k < n; ++k) {
        if (count_a[sigma[k]] == count_a[sigma[k - 1]]) {
            result.warnings.push_back("tie in input signalling counts between " + p.inputs[sigma[k - 1]].label +
                                      " and " + p.inputs[sigma[k]].label + "; broken by wire index");
        }
        if (count_b[pi[k]] == count_b[pi[k - 1]]) {
            result.warnings.push_back("tie in output signalling counts between " + p.outputs[pi[k - 1]].label +
                                      " and " + p.outputs[pi[k]].label + "; broken by wire index");
        }
    }
    for (size_t k = 0; k < n; ++k) {
        result.unravelling.steps.push_back({{p.inputs[sigma[k]].label}, {p.outputs[pi[k]].label}});
    }
    result.ind = std::move(ind);
    return result;
}

UnravelResult unravel_memoryless(const ProcessMatrix& p, std::optional<std::int64_t> n_rows, double chi_minus,
                                 Rng& rng, int threads) {
    const size_t n = p.inputs.size();
    if (p.outputs.size() != n) {
        throw std::invalid_argument("memoryless unravelling needs as many outputs as inputs");
    }
    UnravelResult result;
    result.algorithm = "memoryless";
    result.mode = n_rows ? Mode::sampled : Mode::exact;
    result.rows = n_rows;
    result.queries = n_rows.value_or(0);
    IndMatrix ind = independence_matrix(p, n_rows, chi_minus, rng, threads);
    std::vector<int> match(n, -1);
    std::vector<bool> taken(n, false);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (!ind.ind[i][j] && !taken[j]) {
                match[i] = static_cast<int>(j);
                taken[j] = true;
                break;
            }
        }
    }
    size_t next_free = 0;
    for (size_t i = 0; i < n; ++i) {
        if (match[i] >= 0) {
            continue;
        }
        while (taken[next_free]) {
            ++next_free;
        }
        match[i] = static_cast<int>(next_free);
        taken[next_free] = true;
    }
    for (size_t i = 0; i < n; ++i) {
        result.unravelling.steps.push_back({{p.inputs[i].label}, {p.outputs[static_cast<size_t>(match[i])].label}});
    }
    result.ind = std::move(ind);
    return result;
}

ProcessMatrix memoryless_comparison(const ProcessMatrix& p, const UnravelResult& result) {
    if (!result.ind) {
        throw std::invalid_argument("comparison process needs the independence table of the run");
    }
    std::optional<LabelledMatrix> total;
    for (const Step& step : result.unravelling.steps) {
        if (step.inputs.size() != 1 || step.outputs.size() != 1) {
            throw std::invalid_argument("comparison process needs single-wire steps");
        }
        const auto& in_labels = p.input_labels();
        const auto& out_labels = p.output_labels();
        const size_t i = static_cast<size_t>(std::find(in_labels.begin(), in_labels.end(), step.inputs[0]) - in_labels.begin());
        const size_t j = static_cast<size_t>(std::find(out_labels.begin(), out_labels.end(), step.outputs[0]) - out_labels.begin());
        LabelledMatrix factor = result.ind->ind[i][j]
                                    ? tensor_product(maximally_mixed({p.inputs[i]}), marginal(p.choi, {step.outputs[0]}))
                                    : marginal(p.choi, {step.inputs[0], step.outputs[0]});
        total = total ? tensor_product(*total, factor) : factor;
    }
    LabelledMatrix d = permute_wires(*total, p.choi.labels());
    return ProcessMatrix{std::move(d), p.inputs, p.outputs};
}

}  // namespace qunravel
