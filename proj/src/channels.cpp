#include "qunravel/channels.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qunravel {

namespace {

Wires concat(const Wires& a, const Wires& b) {
    Wires out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

Labels concat(const Labels& a, const Labels& b) {
    Labels out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void require_subset(const Wires& wires, const Labels& labels, const char* what) {
    std::set<std::string> seen;
    for (const auto& l : labels) {
        if (!has_label(wires, l)) {
            throw LabelError(std::string(what) + " label " + l + " is not a wire of the process");
        }
        if (!seen.insert(l).second) {
            throw LabelError(std::string(what) + " label " + l + " listed twice");
        }
    }
}

// Reorders the tensor factors of the row space of `x`.
Matrix permute_rows(const Matrix& x, const std::vector<Eigen::Index>& dims, const std::vector<int>& order) {
    auto map = factor_permutation(dims, order);
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out.row(i) = x.row(map[i]);
    }
    return out;
}

// Applies identity (outer) tensor k to the row space of `x`, where k acts on
// the trailing factor of dimension k.cols().
Matrix apply_trailing(const Matrix& k, const Matrix& x) {
    const Eigen::Index din = k.cols();
    const Eigen::Index dout = k.rows();
    const Eigen::Index outer = x.rows() / din;
    Matrix out(outer * dout, x.cols());
    for (Eigen::Index o = 0; o < outer; ++o) {
        out.block(o * dout, 0, dout, x.cols()) = k * x.block(o * din, 0, din, x.cols());
    }
    return out;
}

}  // namespace

int ProcessMatrix::max_dim() const {
    int d = 1;
    for (const auto& w : concat(inputs, outputs)) {
        d = std::max(d, w.dim);
    }
    return d;
}

Wires make_wires(const std::string& prefix, int count, int dim, Direction direction, int first_index) {
    Wires out;
    for (int i = 0; i < count; ++i) {
        out.push_back({prefix + std::to_string(first_index + i), dim, direction});
    }
    return out;
}

void validate_process(const ProcessMatrix& p, double tol) {
    for (const auto& w : p.inputs) {
        if (w.direction != Direction::input) {
            throw LabelError("wire " + w.label + " listed as input but marked output");
        }
    }
    for (const auto& w : p.outputs) {
        if (w.direction != Direction::output) {
            throw LabelError("wire " + w.label + " listed as output but marked input");
        }
    }
    if (p.choi.row_wires != concat(p.inputs, p.outputs) || p.choi.col_wires != p.choi.row_wires) {
        throw LabelError("choi wires must be the inputs followed by the outputs");
    }
    const Matrix& c = p.choi.entries;
    if (!is_hermitian(c)) {
        throw NumericalError("choi matrix is not Hermitian");
    }
    if (std::abs(c.trace() - 1.0) > tol) {
        throw NumericalError("choi matrix trace is " + std::to_string(c.trace().real()) + ", expected 1");
    }
    Eigen::VectorXd ev = hermitian_eigenvalues(c);
    if (ev.minCoeff() < kPsdFloor) {
        throw NotPsdError("choi matrix has eigenvalue " + std::to_string(ev.minCoeff()));
    }
    LabelledMatrix in_marginal = partial_trace(p.choi, p.input_labels());
    const Eigen::Index d = p.d_in();
    double dev = (in_marginal.entries - Matrix::Identity(d, d) / static_cast<double>(d)).cwiseAbs().maxCoeff();
    if (dev > tol) {
        throw NumericalError("process is not trace preserving (deviation " + std::to_string(dev) + ")");
    }
}

ProcessMatrix make_process(Matrix choi, Wires inputs, Wires outputs, double tol) {
    for (auto& w : inputs) {
        w.direction = Direction::input;
    }
    for (auto& w : outputs) {
        w.direction = Direction::output;
    }
    ProcessMatrix p{LabelledMatrix(std::move(choi), concat(inputs, outputs)), inputs, outputs};
    validate_process(p, tol);
    return p;
}

void check_kraus_completeness(const std::vector<Matrix>& kraus, Eigen::Index d_in, double tol) {
    if (kraus.empty()) {
        throw DimensionError("empty Kraus set");
    }
    Matrix sum = Matrix::Zero(d_in, d_in);
    for (const auto& k : kraus) {
        if (k.cols() != d_in) {
            throw DimensionError("Kraus operator has " + std::to_string(k.cols()) + " columns, expected " +
                                 std::to_string(d_in));
        }
        sum += k.adjoint() * k;
    }
    double dev = (sum - Matrix::Identity(d_in, d_in)).cwiseAbs().maxCoeff();
    if (dev > tol) {
        throw NumericalError("Kraus operators are not trace preserving (deviation " + std::to_string(dev) + ")");
    }
}

ProcessMatrix choi_from_kraus(const std::vector<Matrix>& kraus, const Wires& inputs, const Wires& outputs) {
    const Eigen::Index din = total_dim(inputs);
    const Eigen::Index dout = total_dim(outputs);
    check_kraus_completeness(kraus, din);
    Matrix c = Matrix::Zero(din * dout, din * dout);
    for (const auto& k : kraus) {
        if (k.rows() != dout) {
            throw DimensionError("Kraus operator has " + std::to_string(k.rows()) + " rows, expected " +
                                 std::to_string(dout));
        }
        Vector v(din * dout);
        for (Eigen::Index i = 0; i < din; ++i) {
            v.segment(i * dout, dout) = k.col(i);
        }
        c.noalias() += v * v.adjoint();
    }
    c /= static_cast<double>(din);
    return make_process(std::move(c), inputs, outputs);
}

std::vector<Matrix> kraus_from_choi(const ProcessMatrix& p, double rel_tol) {
    Matrix h = (p.choi.entries + p.choi.entries.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
    const Eigen::Index din = p.d_in();
    const Eigen::Index dout = p.d_out();
    const double top = solver.eigenvalues().maxCoeff();
    std::vector<Matrix> kraus;
    for (Eigen::Index e = solver.eigenvalues().size(); e-- > 0;) {
        double lambda = solver.eigenvalues()[e];
        if (lambda <= rel_tol * top) {
            continue;
        }
        Vector v = solver.eigenvectors().col(e) * std::sqrt(lambda * static_cast<double>(din));
        Matrix k(dout, din);
        for (Eigen::Index i = 0; i < din; ++i) {
            k.col(i) = v.segment(i * dout, dout);
        }
        kraus.push_back(std::move(k));
    }
    return kraus;
}

ProcessMatrix compose_comb(const Comb& comb) {
    if (comb.teeth.empty()) {
        throw DimensionError("comb has no teeth");
    }
    if (comb.teeth.front().mem_in != 1) {
        throw DimensionError("first tooth must have memory input dimension 1");
    }
    Wires ins, outs;
    for (size_t k = 0; k < comb.teeth.size(); ++k) {
        const Tooth& t = comb.teeth[k];
        if (k > 0 && t.mem_in != comb.teeth[k - 1].mem_out) {
            throw DimensionError("memory dimension mismatch between teeth " + std::to_string(k) + " and " +
                                 std::to_string(k + 1));
        }
        check_kraus_completeness(t.kraus, total_dim(t.in_wires) * t.mem_in);
        for (const auto& k_op : t.kraus) {
            if (k_op.rows() != total_dim(t.out_wires) * t.mem_out) {
                throw DimensionError("Kraus output dimension does not match tooth " + std::to_string(k + 1));
            }
        }
        ins = concat(ins, t.in_wires);
        outs = concat(outs, t.out_wires);
    }
    const Eigen::Index din = total_dim(ins);
    // Each operator maps all inputs to (outputs so far, inputs not yet used, memory).
    std::vector<Matrix> ops{Matrix::Identity(din, din)};
    Eigen::Index done = 1;
    Eigen::Index later = din;
    for (const Tooth& t : comb.teeth) {
        const Eigen::Index a = total_dim(t.in_wires);
        const Eigen::Index b = total_dim(t.out_wires);
        later /= a;
        std::vector<Matrix> next;
        for (const auto& x : ops) {
            Matrix y = permute_rows(x, {done, a, later, t.mem_in}, {0, 2, 1, 3});
            for (const auto& k_op : t.kraus) {
                Matrix z = apply_trailing(k_op, y);
                next.push_back(permute_rows(z, {done, later, b, t.mem_out}, {0, 2, 1, 3}));
            }
        }
        ops = std::move(next);
        done *= b;
    }
    const Eigen::Index env = comb.d_env();
    std::vector<Matrix> kraus;
    for (const auto& x : ops) {
        for (Eigen::Index e = 0; e < env; ++e) {
            Matrix k(done, din);
            for (Eigen::Index r = 0; r < done; ++r) {
                k.row(r) = x.row(r * env + e);
            }
            kraus.push_back(std::move(k));
        }
    }
    return choi_from_kraus(kraus, ins, outs);
}

ProcessMatrix reorder_process(const ProcessMatrix& p, const Labels& input_order, const Labels& output_order,
                              const std::map<std::string, std::string>& names) {
    if (input_order.size() != p.inputs.size() || output_order.size() != p.outputs.size()) {
        throw LabelError("reordering must list every wire exactly once");
    }
    require_subset(p.inputs, input_order, "input");
    require_subset(p.outputs, output_order, "output");
    LabelledMatrix c = relabel_wires(permute_wires(p.choi, concat(input_order, output_order)), names);
    Wires ins(c.row_wires.begin(), c.row_wires.begin() + static_cast<long>(input_order.size()));
    Wires outs(c.row_wires.begin() + static_cast<long>(input_order.size()), c.row_wires.end());
    return ProcessMatrix{std::move(c), std::move(ins), std::move(outs)};
}

ProcessMatrix canonicalize(const ProcessMatrix& p) {
    Labels ins = p.input_labels();
    Labels outs = p.output_labels();
    std::stable_sort(ins.begin(), ins.end(), natural_less);
    std::stable_sort(outs.begin(), outs.end(), natural_less);
    return reorder_process(p, ins, outs);
}

double chi1(const ProcessMatrix& p, const Labels& s, const Labels& t) {
    if (s.empty() || t.empty()) {
        throw std::invalid_argument("chi1 requires two nonempty label sets");
    }
    for (const auto& l : s) {
        if (std::find(t.begin(), t.end(), l) != t.end()) {
            throw LabelError("chi1 label sets overlap on " + l);
        }
    }
    Labels st = concat(s, t);
    LabelledMatrix joint = marginal(p.choi, st);
    LabelledMatrix rs = partial_trace(joint, s);
    LabelledMatrix rt = partial_trace(joint, t);
    return trace_norm(joint.entries - tensor_product(rs, rt).entries);
}

std::pair<LabelledMatrix, LabelledMatrix> last_tooth_states(const ProcessMatrix& p, const Labels& P,
                                                            const Labels& Q) {
    require_subset(p.inputs, P, "input");
    require_subset(p.outputs, Q, "output");
    Labels rest_q = labels_of(remove_wires(p.choi.row_wires, Q));
    Labels rest_pq = labels_of(remove_wires(p.choi.row_wires, concat(P, Q)));
    LabelledMatrix first = partial_trace(p.choi, rest_q);
    LabelledMatrix second = tensor_product(maximally_mixed(select_wires(p.inputs, P)), partial_trace(p.choi, rest_pq));
    second = permute_wires(second, first.labels());
    return {std::move(first), std::move(second)};
}

double last_tooth_residual(const ProcessMatrix& p, const Labels& P, const Labels& Q) {
    auto [first, second] = last_tooth_states(p, P, Q);
    return trace_norm(first.entries - second.entries);
}

bool is_last_tooth_exact(const ProcessMatrix& p, const Labels& P, const Labels& Q, double tol) {
    return last_tooth_residual(p, P, Q) <= tol;
}

ProcessMatrix reduce_channel(const ProcessMatrix& p, const Labels& P, const Labels& Q) {
    require_subset(p.inputs, P, "input");
    require_subset(p.outputs, Q, "output");
    Wires ins = remove_wires(p.inputs, P);
    Wires outs = remove_wires(p.outputs, Q);
    LabelledMatrix c = partial_trace(p.choi, labels_of(concat(ins, outs)));
    c.entries /= c.entries.trace();
    return ProcessMatrix{std::move(c), std::move(ins), std::move(outs)};
}

void validate_unravelling(const ProcessMatrix& p, const Unravelling& u) {
    std::set<std::string> ins, outs;
    for (const auto& step : u.steps) {
        for (const auto& l : step.inputs) {
            if (!has_label(p.inputs, l)) {
                throw LabelError("unravelling names unknown input " + l);
            }
            if (!ins.insert(l).second) {
                throw LabelError("input " + l + " appears in more than one step");
            }
        }
        for (const auto& l : step.outputs) {
            if (!has_label(p.outputs, l)) {
                throw LabelError("unravelling names unknown output " + l);
            }
            if (!outs.insert(l).second) {
                throw LabelError("output " + l + " appears in more than one step");
            }
        }
    }
    if (ins.size() != p.inputs.size() || outs.size() != p.outputs.size()) {
        throw LabelError("unravelling does not cover every wire of the process");
    }
}

MembershipResult comb_membership_trace(const ProcessMatrix& p, const Unravelling& u, double tol) {
    validate_unravelling(p, u);
    MembershipResult result;
    result.residuals.assign(u.steps.size(), 0.0);
    ProcessMatrix current = p;
    for (size_t k = u.steps.size(); k-- > 1;) {
        const Step& step = u.steps[k];
        double r = last_tooth_residual(current, step.inputs, step.outputs);
        result.residuals[k] = r;
        if (r > tol && result.member) {
            result.member = false;
            result.failing_step = static_cast<int>(k);
        }
        current = reduce_channel(current, step.inputs, step.outputs);
    }
    return result;
}

bool comb_membership(const ProcessMatrix& p, const Unravelling& u, double tol) {
    return comb_membership_trace(p, u, tol).member;
}

int kraus_rank(const ProcessMatrix& p) { return matrix_rank(p.choi, kRankRelTol); }

ProcessMatrix standardize(const ProcessMatrix& p) {
    const int D = p.max_dim();
    auto pad_wires = [D](Wires wires) {
        for (auto& w : wires) {
            w.dim = D;
        }
        return wires;
    };
    // Flat index in the padded space of each basis state of the original space.
    auto embedding = [D](const Wires& wires) {
        std::vector<Eigen::Index> map{0};
        for (const auto& w : wires) {
            std::vector<Eigen::Index> next;
            for (Eigen::Index base : map) {
                for (int v = 0; v < w.dim; ++v) {
                    next.push_back(base * D + v);
                }
            }
            map = std::move(next);
        }
        return map;
    };
    Wires ins = pad_wires(p.inputs);
    Wires outs = pad_wires(p.outputs);
    auto in_map = embedding(p.inputs);
    auto out_map = embedding(p.outputs);
    const Eigen::Index din = total_dim(ins);
    const Eigen::Index dout = total_dim(outs);
    std::vector<Matrix> kraus;
    for (const auto& k : kraus_from_choi(p)) {
        Matrix padded = Matrix::Zero(dout, din);
        for (Eigen::Index i = 0; i < k.cols(); ++i) {
            for (Eigen::Index o = 0; o < k.rows(); ++o) {
                padded(out_map[o], in_map[i]) = k(o, i);
            }
        }
        kraus.push_back(std::move(padded));
    }
    std::vector<bool> inside(static_cast<size_t>(din), false);
    for (auto i : in_map) {
        inside[static_cast<size_t>(i)] = true;
    }
    for (Eigen::Index x = 0; x < din; ++x) {
        if (!inside[static_cast<size_t>(x)]) {
            Matrix extra = Matrix::Zero(dout, din);
            extra(0, x) = 1.0;
            kraus.push_back(std::move(extra));
        }
    }
    return choi_from_kraus(kraus, ins, outs);
}

}  // namespace qunravel
