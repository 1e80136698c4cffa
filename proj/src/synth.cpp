#include "qunravel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace qunravel {

namespace {

constexpr double kPi = 3.14159265358979323846;

Matrix gaussian_matrix(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    Matrix g(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            g(i, j) = cplx(normal(rng), normal(rng));
        }
    }
    return g;
}

std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

std::string label(char prefix, int index) { return std::string(1, prefix) + std::to_string(index + 1); }

WireSystem in_wire(int index, int d) { return {label('A', index), d, Direction::input}; }
WireSystem out_wire(int index, int d) { return {label('B', index), d, Direction::output}; }

// True iff every value is either zero or at least `target`; updates the
// smallest nonzero value seen.
bool gap_holds(const std::vector<double>& values, double target, double& smallest) {
    smallest = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (double v : values) {
        if (v <= kZeroChi) {
            continue;
        }
        smallest = std::min(smallest, v);
        if (v < target) {
            ok = false;
        }
    }
    if (!std::isfinite(smallest)) {
        smallest = 0.0;
    }
    return ok;
}

SynthResult finish(Comb comb, Unravelling truth) {
    SynthResult result;
    result.process = canonicalize(compose_comb(comb));
    result.comb = std::move(comb);
    result.truth = std::move(truth);
    result.kraus_rank = kraus_rank(result.process);
    return result;
}

void require_positive(int value, const char* name) {
    if (value < 1) {
        throw std::invalid_argument(std::string(name) + " must be at least 1");
    }
}

}  // namespace

Matrix haar_unitary(int d, Rng& rng) {
    Matrix z = gaussian_matrix(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        double mag = std::abs(r(i, i));
        q.col(i) *= mag > 0.0 ? r(i, i) / mag : cplx(1.0);
    }
    return q;
}

Matrix haar_isometry(int d_out, int d_in, Rng& rng) {
    if (d_out < d_in) {
        throw DimensionError("isometry needs output dimension >= input dimension");
    }
    return haar_unitary(d_out, rng).leftCols(d_in);
}

std::vector<Matrix> random_kraus(int d_out, int d_in, int rank, Rng& rng) {
    require_positive(rank, "Kraus rank");
    Matrix v = haar_isometry(d_out * rank, d_in, rng);
    std::vector<Matrix> kraus(static_cast<size_t>(rank), Matrix(d_out, d_in));
    for (int o = 0; o < d_out; ++o) {
        for (int k = 0; k < rank; ++k) {
            kraus[static_cast<size_t>(k)].row(o) = v.row(o * rank + k);
        }
    }
    return kraus;
}

Matrix random_state(int d, int rank, Rng& rng) {
    Matrix g = gaussian_matrix(d, rank, rng);
    Matrix rho = g * g.adjoint();
    return rho / rho.trace();
}

std::vector<double> probed_chi_values(const ProcessMatrix& p, const Unravelling& truth) {
    std::vector<double> values;
    ProcessMatrix current = p;
    for (size_t k = truth.steps.size(); k-- > 0;) {
        const Labels all = current.choi.labels();
        for (const auto& x : current.input_labels()) {
            for (const auto& y : current.output_labels()) {
                Labels rest;
                for (const auto& l : all) {
                    if (l != x && l != y) {
                        rest.push_back(l);
                    }
                }
                if (!rest.empty()) {
                    values.push_back(chi1(current, {x}, rest));
                }
            }
        }
        current = reduce_channel(current, truth.steps[k].inputs, truth.steps[k].outputs);
    }
    for (const auto& a : p.input_labels()) {
        for (const auto& b : p.output_labels()) {
            values.push_back(chi1(p, {a}, {b}));
        }
    }
    return values;
}

SynthResult random_comb(const SynthSpec& spec, Rng& rng) {
    require_positive(spec.n, "n");
    require_positive(spec.d, "d");
    require_positive(spec.d_mem, "d_mem");
    require_positive(spec.d_env, "d_env");
    // Isometric teeth cannot shrink the memory, so it is capped by d_env.
    const int mem = std::min(spec.d_mem, spec.d_env);
    double worst = 0.0;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        Rng sub = rng.substream(static_cast<std::uint64_t>(attempt));
        auto sigma = random_permutation(spec.n, sub);
        auto pi = random_permutation(spec.n, sub);
        Comb comb;
        Unravelling truth;
        for (int k = 0; k < spec.n; ++k) {
            const int m_in = k == 0 ? 1 : mem;
            const int m_out = k == spec.n - 1 ? spec.d_env : mem;
            Tooth t;
            t.in_wires = {in_wire(sigma[k], spec.d)};
            t.out_wires = {out_wire(pi[k], spec.d)};
            t.mem_in = m_in;
            t.mem_out = m_out;
            t.kraus = {haar_isometry(spec.d * m_out, spec.d * m_in, sub)};
            comb.teeth.push_back(std::move(t));
            truth.steps.push_back({{label('A', sigma[k])}, {label('B', pi[k])}});
        }
        SynthResult result = finish(std::move(comb), std::move(truth));
        result.attempts = attempt + 1;
        if (gap_holds(probed_chi_values(result.process, result.truth), spec.chi_min_target, result.chi_min_achieved)) {
            return result;
        }
        worst = result.chi_min_achieved;
    }
    throw GenerationError("no comb met chi_min_target " + std::to_string(spec.chi_min_target) + " in " +
                          std::to_string(kMaxRejections) + " attempts (last smallest nonzero chi_1 " +
                          std::to_string(worst) + ")");
}

SynthResult total_order_chain(int n, int d, Rng& rng, double chi_min_target) {
    require_positive(n, "n");
    if (d < 2) {
        throw std::invalid_argument("total-order chain needs d >= 2");
    }
    Matrix swap = Matrix::Zero(d * d, d * d);
    for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
            swap(b * d + a, a * d + b) = 1.0;
        }
    }
    const Matrix id = Matrix::Identity(d * d, d * d);
    double worst = 0.0;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        Rng sub = rng.substream(static_cast<std::uint64_t>(attempt));
        auto sigma = random_permutation(n, sub);
        auto pi = random_permutation(n, sub);
        std::uniform_real_distribution<double> angle(kPi / 5.0, 2.0 * kPi / 5.0);
        Comb comb;
        Unravelling truth;
        for (int k = 0; k < n; ++k) {
            const double theta = angle(sub);
            // Partial swap of the fresh input with the memory, dressed with local unitaries.
            Matrix w = std::cos(theta) * id + cplx(0.0, std::sin(theta)) * swap;
            Matrix local_in = tensor_product(LabelledMatrix(haar_unitary(d, sub), Wires{{"x", d, Direction::input}}),
                                             identity(Wires{{"m", d, Direction::input}}))
                                  .entries;
            Matrix local_out = tensor_product(LabelledMatrix(haar_unitary(d, sub), Wires{{"x", d, Direction::input}}),
                                              LabelledMatrix(haar_unitary(d, sub), Wires{{"m", d, Direction::input}}))
                                   .entries;
            Matrix v = local_out * w * local_in;
            Tooth t;
            t.in_wires = {in_wire(sigma[k], d)};
            t.out_wires = {out_wire(pi[k], d)};
            t.mem_out = d;
            if (k == 0) {
                // The memory starts in |0>.
                Matrix iso(d * d, d);
                for (int a = 0; a < d; ++a) {
                    iso.col(a) = v.col(a * d);
                }
                t.mem_in = 1;
                t.kraus = {iso};
            } else {
                t.mem_in = d;
                t.kraus = {v};
            }
            comb.teeth.push_back(std::move(t));
            truth.steps.push_back({{label('A', sigma[k])}, {label('B', pi[k])}});
        }
        SynthResult result = finish(std::move(comb), std::move(truth));
        result.attempts = attempt + 1;
        std::vector<double> values;
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                values.push_back(chi1(result.process, {label('A', sigma[i])}, {label('B', pi[j])}));
            }
        }
        double smallest = *std::min_element(values.begin(), values.end());
        result.chi_min_achieved = smallest;
        if (smallest >= chi_min_target) {
            return result;
        }
        worst = smallest;
    }
    throw GenerationError("no total-order chain met chi_min_target " + std::to_string(chi_min_target) + " in " +
                          std::to_string(kMaxRejections) + " attempts (last smallest chi_1 " + std::to_string(worst) +
                          ")");
}

SynthResult entangling_c2(const SynthSpec& spec, Rng& rng) {
    require_positive(spec.d, "d");
    require_positive(spec.d_mem, "d_mem");
    require_positive(spec.d_env, "d_env");
    const int d = spec.d;
    const int mem = std::min(spec.d_mem, spec.d_env);
    double worst = 0.0;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        Rng sub = rng.substream(static_cast<std::uint64_t>(attempt));
        Tooth first;
        first.in_wires = {in_wire(0, d), in_wire(1, d)};
        first.out_wires = {out_wire(0, d), out_wire(1, d)};
        first.mem_in = 1;
        first.mem_out = mem;
        first.kraus = {haar_isometry(d * d * mem, d * d, sub)};
        Tooth second;
        second.in_wires = {in_wire(2, d)};
        second.out_wires = {out_wire(2, d)};
        second.mem_in = mem;
        second.mem_out = spec.d_env;
        second.kraus = {haar_isometry(d * spec.d_env, d * mem, sub)};
        Unravelling truth{{{{"A1", "A2"}, {"B1", "B2"}}, {{"A3"}, {"B3"}}}};
        SynthResult result = finish(Comb{{std::move(first), std::move(second)}}, std::move(truth));
        result.attempts = attempt + 1;
        if (gap_holds(probed_chi_values(result.process, result.truth), spec.chi_min_target, result.chi_min_achieved)) {
            return result;
        }
        worst = result.chi_min_achieved;
    }
    throw GenerationError("no entangling comb met chi_min_target " + std::to_string(spec.chi_min_target) + " in " +
                          std::to_string(kMaxRejections) + " attempts (last smallest nonzero chi_1 " +
                          std::to_string(worst) + ")");
}

SynthResult random_memoryless(int n, int d, Rng& rng, const MemorylessOptions& options) {
    require_positive(n, "n");
    require_positive(d, "d");
    auto pi = random_permutation(n, rng);
    Comb comb;
    Unravelling truth;
    for (int i = 0; i < n; ++i) {
        Tooth t;
        t.in_wires = {in_wire(i, d)};
        t.out_wires = {out_wire(pi[i], d)};
        const bool constant = std::find(options.constant_teeth.begin(), options.constant_teeth.end(), i) !=
                              options.constant_teeth.end();
        if (constant) {
            Eigen::SelfAdjointEigenSolver<Matrix> solver(random_state(d, d, rng));
            for (int k = 0; k < d; ++k) {
                for (int a = 0; a < d; ++a) {
                    Matrix op = Matrix::Zero(d, d);
                    op.col(a) = std::sqrt(std::max(solver.eigenvalues()[k], 0.0)) * solver.eigenvectors().col(k);
                    t.kraus.push_back(std::move(op));
                }
            }
        } else {
            t.kraus = random_kraus(d, d, options.kraus_rank, rng);
        }
        comb.teeth.push_back(std::move(t));
        truth.steps.push_back({{label('A', i)}, {label('B', pi[i])}});
    }
    SynthResult result = finish(std::move(comb), std::move(truth));
    result.attempts = 1;
    std::vector<double> values;
    for (const auto& step : result.truth.steps) {
        values.push_back(chi1(result.process, step.inputs, step.outputs));
    }
    gap_holds(values, 0.0, result.chi_min_achieved);
    return result;
}

SynthResult generate(const SynthSpec& spec, Rng& rng) {
    switch (spec.family) {
        case Family::isometric_chain:
            return random_comb(spec, rng);
        case Family::memoryless:
            return random_memoryless(spec.n, spec.d, rng);
        case Family::total_order_chain:
            return total_order_chain(spec.n, spec.d, rng, spec.chi_min_target);
        case Family::entangling_c2:
            return entangling_c2(spec, rng);
    }
    throw std::invalid_argument("unknown family");
}

ShuffleResult shuffle_wires(const ProcessMatrix& p, Rng& rng) {
    ShuffleResult result;
    result.input_perm = random_permutation(static_cast<int>(p.inputs.size()), rng);
    result.output_perm = random_permutation(static_cast<int>(p.outputs.size()), rng);
    Labels in_order, out_order;
    for (size_t k = 0; k < p.inputs.size(); ++k) {
        const auto& old = p.inputs[static_cast<size_t>(result.input_perm[k])].label;
        in_order.push_back(old);
        result.names[old] = p.inputs[k].label;
    }
    for (size_t k = 0; k < p.outputs.size(); ++k) {
        const auto& old = p.outputs[static_cast<size_t>(result.output_perm[k])].label;
        out_order.push_back(old);
        result.names[old] = p.outputs[k].label;
    }
    result.process = reorder_process(p, in_order, out_order, result.names);
    return result;
}

Unravelling relabel(const Unravelling& u, const std::map<std::string, std::string>& names) {
    Unravelling out = u;
    for (auto& step : out.steps) {
        for (auto* labels : {&step.inputs, &step.outputs}) {
            for (auto& l : *labels) {
                if (auto it = names.find(l); it != names.end()) {
                    l = it->second;
                }
            }
        }
    }
    return out;
}

}  // namespace qunravel
