#include "qunravel/tensor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

namespace qunravel {

namespace {

void check_side(const Matrix& m, const Wires& rows, const Wires& cols) {
    if (m.rows() != total_dim(rows) || m.cols() != total_dim(cols)) {
        throw DimensionError("matrix shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             " does not match wire dimensions " + std::to_string(total_dim(rows)) + "x" +
                             std::to_string(total_dim(cols)));
    }
    for (const auto* list : {&rows, &cols}) {
        std::set<std::string> seen;
        for (const auto& w : *list) {
            if (w.dim < 1) {
                throw DimensionError("wire " + w.label + " has dimension " + std::to_string(w.dim));
            }
            if (!seen.insert(w.label).second) {
                throw LabelError("duplicate wire label " + w.label);
            }
        }
    }
}

void require_square_operator(const LabelledMatrix& m) {
    if (m.row_wires != m.col_wires) {
        throw DimensionError("operation requires matching row and column wires");
    }
}

std::vector<Eigen::Index> dims_of(const Wires& wires) {
    std::vector<Eigen::Index> dims;
    for (const auto& w : wires) {
        dims.push_back(w.dim);
    }
    return dims;
}

// Indices of `labels` within `wires`; throws on unknown or repeated labels.
std::vector<int> positions(const Wires& wires, const Labels& labels) {
    std::vector<int> pos;
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (!seen.insert(label).second) {
            throw LabelError("label listed twice: " + label);
        }
        auto it = std::find_if(wires.begin(), wires.end(), [&](const WireSystem& w) { return w.label == label; });
        if (it == wires.end()) {
            throw LabelError("unknown wire label " + label);
        }
        pos.push_back(static_cast<int>(it - wires.begin()));
    }
    return pos;
}

Eigen::VectorXd clipped_magnitudes(const LabelledMatrix& m, double rel_tol) {
    Eigen::VectorXd ev = hermitian_eigenvalues(m.entries);
    if (ev.size() > 0 && ev.minCoeff() < kPsdFloor) {
        throw NotPsdError("eigenvalue " + std::to_string(ev.minCoeff()) + " below PSD floor");
    }
    double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
    std::vector<double> mags;
    for (double v : ev) {
        mags.push_back(v > rel_tol * top ? v : 0.0);
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    return Eigen::Map<Eigen::VectorXd>(mags.data(), static_cast<Eigen::Index>(mags.size()));
}

double tail_from(const Eigen::VectorXd& sorted_desc, int r) {
    double sum = 0.0;
    for (Eigen::Index i = r; i < sorted_desc.size(); ++i) {
        sum += sorted_desc[i] * sorted_desc[i];
    }
    return std::sqrt(sum);
}

}  // namespace

LabelledMatrix::LabelledMatrix(Matrix m, Wires wires) : LabelledMatrix(std::move(m), wires, wires) {}

LabelledMatrix::LabelledMatrix(Matrix m, Wires rows, Wires cols)
    : entries(std::move(m)), row_wires(std::move(rows)), col_wires(std::move(cols)) {
    check_side(entries, row_wires, col_wires);
}

Labels LabelledMatrix::labels() const { return labels_of(row_wires); }

Eigen::Index total_dim(const Wires& wires) {
    Eigen::Index d = 1;
    for (const auto& w : wires) {
        d *= w.dim;
    }
    return d;
}

Labels labels_of(const Wires& wires) {
    Labels out;
    for (const auto& w : wires) {
        out.push_back(w.label);
    }
    return out;
}

const WireSystem& find_wire(const Wires& wires, const std::string& label) {
    for (const auto& w : wires) {
        if (w.label == label) {
            return w;
        }
    }
    throw LabelError("unknown wire label " + label);
}

bool has_label(const Wires& wires, const std::string& label) {
    return std::any_of(wires.begin(), wires.end(), [&](const WireSystem& w) { return w.label == label; });
}

Wires select_wires(const Wires& wires, const Labels& labels) {
    Wires out;
    for (int p : positions(wires, labels)) {
        out.push_back(wires[p]);
    }
    return out;
}

Wires remove_wires(const Wires& wires, const Labels& labels) {
    positions(wires, labels);
    Wires out;
    for (const auto& w : wires) {
        if (std::find(labels.begin(), labels.end(), w.label) == labels.end()) {
            out.push_back(w);
        }
    }
    return out;
}

bool natural_less(const std::string& a, const std::string& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
            size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            unsigned long long x = std::stoull(a.substr(i, ie - i));
            unsigned long long y = std::stoull(b.substr(j, je - j));
            if (x != y) {
                return x < y;
            }
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) {
                return a[i] < b[j];
            }
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

LabelledMatrix identity(const Wires& wires) {
    Eigen::Index d = total_dim(wires);
    return LabelledMatrix(Matrix::Identity(d, d), wires);
}

LabelledMatrix maximally_mixed(const Wires& wires) {
    Eigen::Index d = total_dim(wires);
    return LabelledMatrix(Matrix::Identity(d, d) / static_cast<double>(d), wires);
}

LabelledMatrix tensor_product(const LabelledMatrix& a, const LabelledMatrix& b) {
    for (const auto* wires : {&b.row_wires, &b.col_wires}) {
        for (const auto& w : *wires) {
            if (has_label(a.row_wires, w.label) || has_label(a.col_wires, w.label)) {
                throw LabelError("label collision in tensor product: " + w.label);
            }
        }
    }
    Matrix out(a.entries.rows() * b.entries.rows(), a.entries.cols() * b.entries.cols());
    for (Eigen::Index i = 0; i < a.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.entries.cols(); ++j) {
            out.block(i * b.entries.rows(), j * b.entries.cols(), b.entries.rows(), b.entries.cols()) =
                a.entries(i, j) * b.entries;
        }
    }
    Wires rows = a.row_wires;
    rows.insert(rows.end(), b.row_wires.begin(), b.row_wires.end());
    Wires cols = a.col_wires;
    cols.insert(cols.end(), b.col_wires.begin(), b.col_wires.end());
    return LabelledMatrix(std::move(out), std::move(rows), std::move(cols));
}

std::vector<Eigen::Index> factor_permutation(const std::vector<Eigen::Index>& dims, const std::vector<int>& order) {
    const size_t k = dims.size();
    std::vector<Eigen::Index> old_stride(k, 1);
    for (size_t w = k; w-- > 1;) {
        old_stride[w - 1] = old_stride[w] * dims[w];
    }
    Eigen::Index total = 1;
    for (auto d : dims) {
        total *= d;
    }
    std::vector<Eigen::Index> map(static_cast<size_t>(total));
    std::vector<Eigen::Index> digit(k, 0);
    for (Eigen::Index flat = 0; flat < total; ++flat) {
        Eigen::Index old = 0;
        for (size_t j = 0; j < k; ++j) {
            old += digit[j] * old_stride[order[j]];
        }
        map[static_cast<size_t>(flat)] = old;
        for (size_t j = k; j-- > 0;) {
            if (++digit[j] < dims[order[j]]) {
                break;
            }
            digit[j] = 0;
        }
    }
    return map;
}

LabelledMatrix permute_wires(const LabelledMatrix& m, const Labels& order) {
    require_square_operator(m);
    if (order.size() != m.row_wires.size()) {
        throw LabelError("permutation must list every wire exactly once");
    }
    std::vector<int> pos = positions(m.row_wires, order);
    auto map = factor_permutation(dims_of(m.row_wires), pos);
    const Eigen::Index d = m.dim();
    Matrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i, j) = m.entries(map[i], map[j]);
        }
    }
    Wires wires;
    for (int p : pos) {
        wires.push_back(m.row_wires[p]);
    }
    return LabelledMatrix(std::move(out), std::move(wires));
}

LabelledMatrix partial_trace(const LabelledMatrix& m, const Labels& keep) {
    require_square_operator(m);
    std::vector<int> keep_pos = positions(m.row_wires, keep);
    std::sort(keep_pos.begin(), keep_pos.end());
    std::vector<int> order = keep_pos;
    Wires kept;
    for (int p : keep_pos) {
        kept.push_back(m.row_wires[p]);
    }
    for (int w = 0; w < static_cast<int>(m.row_wires.size()); ++w) {
        if (!std::binary_search(keep_pos.begin(), keep_pos.end(), w)) {
            order.push_back(w);
        }
    }
    const Eigen::Index dk = total_dim(kept);
    const Eigen::Index dt = m.dim() / dk;
    auto map = factor_permutation(dims_of(m.row_wires), order);
    Matrix out = Matrix::Zero(dk, dk);
    for (Eigen::Index b = 0; b < dk; ++b) {
        for (Eigen::Index a = 0; a < dk; ++a) {
            cplx sum = 0.0;
            for (Eigen::Index t = 0; t < dt; ++t) {
                sum += m.entries(map[a * dt + t], map[b * dt + t]);
            }
            out(a, b) = sum;
        }
    }
    return LabelledMatrix(std::move(out), std::move(kept));
}

LabelledMatrix marginal(const LabelledMatrix& m, const Labels& labels) {
    return permute_wires(partial_trace(m, labels), labels);
}

LabelledMatrix relabel_wires(const LabelledMatrix& m, const std::map<std::string, std::string>& names) {
    auto rename = [&](Wires wires) {
        for (auto& w : wires) {
            if (auto it = names.find(w.label); it != names.end()) {
                w.label = it->second;
            }
        }
        return wires;
    };
    return LabelledMatrix(m.entries, rename(m.row_wires), rename(m.col_wires));
}

cplx trace(const LabelledMatrix& m) { return m.entries.trace(); }

bool is_hermitian(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    if (m.size() == 0) {
        return true;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
    if (!is_hermitian(m)) {
        throw DimensionError("matrix is not Hermitian within tolerance");
    }
    if (m.size() == 0) {
        return Eigen::VectorXd();
    }
    Matrix h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double trace_norm(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("trace norm requires a square matrix");
    }
    if (m.size() == 0) {
        return 0.0;
    }
    if (is_hermitian(m)) {
        return hermitian_eigenvalues(m).cwiseAbs().sum();
    }
    Eigen::BDCSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

double trace_norm(const LabelledMatrix& m) { return trace_norm(m.entries); }

double hs_norm(const Matrix& m) { return m.norm(); }

double hs_norm(const LabelledMatrix& m) { return hs_norm(m.entries); }

int matrix_rank(const LabelledMatrix& m, double rel_tol) {
    Eigen::VectorXd mags = clipped_magnitudes(m, rel_tol);
    return static_cast<int>((mags.array() > 0.0).count());
}

int rank_eta(const LabelledMatrix& m, double eta, double rel_tol) {
    if (eta < 0.0) {
        throw std::invalid_argument("rank_eta requires eta >= 0");
    }
    Eigen::VectorXd mags = clipped_magnitudes(m, rel_tol);
    if (mags.size() == 0 || mags[0] == 0.0) {
        return 0;
    }
    for (int r = 1; r <= mags.size(); ++r) {
        if (tail_from(mags, r) <= eta) {
            return r;
        }
    }
    return static_cast<int>(mags.size());
}

double eigen_tail_norm(const LabelledMatrix& m, int r, double rel_tol) {
    return tail_from(clipped_magnitudes(m, rel_tol), std::max(r, 0));
}

}  // namespace qunravel
