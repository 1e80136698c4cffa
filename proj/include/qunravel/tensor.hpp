#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qunravel {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Entrywise tolerance for treating a matrix as Hermitian.
inline constexpr double kHermitianTol = 1e-10;
// Eigenvalues below this floor make a matrix not positive semidefinite.
inline constexpr double kPsdFloor = -1e-9;
// Default relative cutoff for counting eigenvalues as nonzero.
inline constexpr double kRankRelTol = 1e-9;

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Unknown, duplicated or colliding wire labels.
struct LabelError : Error {
    using Error::Error;
};
// Shape or dimension mismatch.
struct DimensionError : Error {
    using Error::Error;
};
// A matrix required to be positive semidefinite has a negative eigenvalue.
struct NotPsdError : Error {
    using Error::Error;
};
// A numerical sanity check failed (probabilities out of range, singular frames).
struct NumericalError : Error {
    using Error::Error;
};

enum class Direction { input, output };

// A labelled subsystem. Dimension-1 wires are allowed as placeholders.
struct WireSystem {
    std::string label;
    int dim = 1;
    Direction direction = Direction::input;

    bool operator==(const WireSystem&) const = default;
};

using Wires = std::vector<WireSystem>;
using Labels = std::vector<std::string>;

// Dense matrix whose row and column spaces are tensor products of wires.
// The first wire in each list is the most significant index.
struct LabelledMatrix {
    Matrix entries;
    Wires row_wires;
    Wires col_wires;

    LabelledMatrix() = default;
    // Square operator acting on `wires`.
    LabelledMatrix(Matrix m, Wires wires);
    LabelledMatrix(Matrix m, Wires rows, Wires cols);

    const Wires& wires() const { return row_wires; }
    Labels labels() const;
    Eigen::Index dim() const { return entries.rows(); }
};

// Product of wire dimensions; 1 for an empty list.
Eigen::Index total_dim(const Wires& wires);
Labels labels_of(const Wires& wires);
const WireSystem& find_wire(const Wires& wires, const std::string& label);
bool has_label(const Wires& wires, const std::string& label);
// Wires of `wires` whose labels are in `labels`, in the order of `labels`.
Wires select_wires(const Wires& wires, const Labels& labels);
// Wires of `wires` whose labels are not in `labels`, keeping their order.
Wires remove_wires(const Wires& wires, const Labels& labels);

// Orders labels such as A2 < A10 by comparing digit runs numerically.
bool natural_less(const std::string& a, const std::string& b);

LabelledMatrix identity(const Wires& wires);
LabelledMatrix maximally_mixed(const Wires& wires);

LabelledMatrix tensor_product(const LabelledMatrix& a, const LabelledMatrix& b);
// Traces out every wire not in `keep`; kept wires stay in their original order.
LabelledMatrix partial_trace(const LabelledMatrix& m, const Labels& keep);
// Marginal on `labels`, with wires arranged in the order given.
LabelledMatrix marginal(const LabelledMatrix& m, const Labels& labels);
// Re-indexes a square operator so its wire list follows `order`.
LabelledMatrix permute_wires(const LabelledMatrix& m, const Labels& order);
// Renames wires; labels absent from `names` are kept.
LabelledMatrix relabel_wires(const LabelledMatrix& m, const std::map<std::string, std::string>& names);

// Flat-index map for reordering tensor factors: entry i of the result is the
// old flat index of the new flat index i, where new factor j is old factor order[j].
std::vector<Eigen::Index> factor_permutation(const std::vector<Eigen::Index>& dims,
                                             const std::vector<int>& order);

cplx trace(const LabelledMatrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);
// Ascending eigenvalues of a Hermitian matrix; throws DimensionError otherwise.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);

double trace_norm(const Matrix& m);
double trace_norm(const LabelledMatrix& m);
double hs_norm(const Matrix& m);
double hs_norm(const LabelledMatrix& m);

int matrix_rank(const LabelledMatrix& m, double rel_tol = kRankRelTol);
int rank_eta(const LabelledMatrix& m, double eta, double rel_tol = kRankRelTol);
// Root-sum-square of all but the r largest eigenvalues, after zeroing those
// below rel_tol times the largest. Equals the distance to the best rank-r approximant.
double eigen_tail_norm(const LabelledMatrix& m, int r, double rel_tol = kRankRelTol);

}  // namespace qunravel
