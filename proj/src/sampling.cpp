#include "qunravel/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace qunravel {

namespace {

Vector vec(const Matrix& m) {
    const Eigen::Index d = m.rows();
    Vector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            v[i * d + j] = m(i, j);
        }
    }
    return v;
}

Matrix unvec(const Vector& v, Eigen::Index d) {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            m(i, j) = v[i * d + j];
        }
    }
    return m;
}

Vector random_unit_vector(int d, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector v(d);
    for (int i = 0; i < d; ++i) {
        v[i] = cplx(normal(rng), normal(rng));
    }
    return v / v.norm();
}

// Index of the first cumulative weight exceeding u * total.
int draw_index(const std::vector<double>& cdf, double u) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

std::vector<double> cumulative(const double* w, size_t n) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += std::max(w[i], 0.0);
        cdf[i] = acc;
    }
    return cdf;
}

}  // namespace

std::vector<std::uint16_t> OutcomeMatrix::column(int col) const {
    std::vector<std::uint16_t> out(static_cast<size_t>(rows));
    for (std::int64_t r = 0; r < rows; ++r) {
        out[static_cast<size_t>(r)] = at(r, col);
    }
    return out;
}

double swap_success_probability(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols() || rho.rows() != rho.cols()) {
        throw DimensionError("SWAP test requires two square matrices of equal dimension");
    }
    double overlap = (rho * sigma).trace().real();
    if (overlap < -1e-9 || overlap > 1.0 + 1e-9) {
        throw NumericalError("Tr[rho sigma] = " + std::to_string(overlap) + " outside [0, 1]");
    }
    return std::clamp((1.0 + overlap) / 2.0, 0.0, 1.0);
}

bool swap_test_sample(const Matrix& rho, const Matrix& sigma, Rng& rng) {
    return rng.uniform() < swap_success_probability(rho, sigma);
}

std::int64_t swap_test_runs(double eps, double kappa) {
    if (!(eps > 0.0 && eps < 1.0) || !(kappa > 0.0 && kappa < 1.0)) {
        throw std::invalid_argument("SWAP test requires eps and kappa in (0, 1)");
    }
    return static_cast<std::int64_t>(std::ceil(2.0 / (eps * eps) * std::log(2.0 / kappa)));
}

double swaptest_estimate(const Matrix& rho, const Matrix& sigma, double eps, double kappa, Rng& rng) {
    const std::int64_t n = swap_test_runs(eps, kappa);
    std::binomial_distribution<std::int64_t> successes(n, swap_success_probability(rho, sigma));
    return 2.0 * static_cast<double>(successes(rng)) / static_cast<double>(n) - 1.0;
}

void validate_povm(const Povm& povm, double tol) {
    if (povm.effects.empty()) {
        throw DimensionError("POVM has no effects");
    }
    const int d = povm.dim();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& e : povm.effects) {
        if (e.rows() != d || e.cols() != d) {
            throw DimensionError("POVM effects have inconsistent dimensions");
        }
        if (hermitian_eigenvalues(e).minCoeff() < kPsdFloor) {
            throw NotPsdError("POVM effect is not positive semidefinite");
        }
        sum += e;
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > tol) {
        throw NumericalError("POVM effects do not sum to the identity");
    }
}

Povm build_sic_povm_qubit() {
    const double s = 1.0 / std::sqrt(3.0);
    const double bloch[4][3] = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    Povm povm;
    for (const auto& n : bloch) {
        Matrix e(2, 2);
        // (1/2)|psi><psi| = (I + n.sigma) / 4
        e << cplx(1.0 + n[2], 0.0), cplx(n[0], -n[1]), cplx(n[0], n[1]), cplx(1.0 - n[2], 0.0);
        povm.effects.push_back(e / 4.0);
    }
    return povm;
}

Povm build_ic_povm(int d, Rng& rng) {
    if (d < 2) {
        throw std::invalid_argument("IC-POVM requires d >= 2");
    }
    const double mix = 0.1;
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<Matrix> raw;
        Matrix total = Matrix::Zero(d, d);
        for (int k = 0; k < d * d; ++k) {
            Vector v = random_unit_vector(d, rng);
            Matrix a = (1.0 - mix) * v * v.adjoint() + mix * Matrix::Identity(d, d) / static_cast<double>(d);
            total += a;
            raw.push_back(std::move(a));
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(total);
        Matrix inv_sqrt = solver.operatorInverseSqrt();
        Povm povm;
        for (const auto& a : raw) {
            Matrix e = inv_sqrt * a * inv_sqrt;
            povm.effects.push_back((e + e.adjoint()) / 2.0);
        }
        if (frame_diagnostics(povm).min_eig > 1e-4) {
            return povm;
        }
    }
    throw NumericalError("failed to generate an informationally complete POVM in 100 attempts");
}

Povm default_povm(int d, Rng& rng) { return d == 2 ? build_sic_povm_qubit() : build_ic_povm(d, rng); }

FrameDiagnostics frame_diagnostics(const Povm& povm) {
    const int d = povm.dim();
    Matrix f = Matrix::Zero(d * d, d * d);
    for (const auto& e : povm.effects) {
        Vector v = vec(e);
        f.noalias() += v * v.adjoint();
    }
    Eigen::VectorXd ev = hermitian_eigenvalues(f);
    return FrameDiagnostics{f, ev.minCoeff(), ev.maxCoeff()};
}

std::vector<Matrix> dual_frame(const Povm& povm) {
    FrameDiagnostics diag = frame_diagnostics(povm);
    if (diag.min_eig <= 1e-12 * diag.max_eig) {
        throw NumericalError("frame operator is singular; POVM is not informationally complete");
    }
    Eigen::LDLT<Matrix> solver(diag.frame_operator);
    std::vector<Matrix> duals;
    for (const auto& e : povm.effects) {
        duals.push_back(unvec(solver.solve(vec(e)), povm.dim()));
    }
    return duals;
}

std::vector<double> product_distribution(const LabelledMatrix& m, const std::vector<const Povm*>& povms) {
    if (povms.size() != m.row_wires.size()) {
        throw DimensionError("need one POVM per wire");
    }
    std::vector<Matrix> level{m.entries};
    Eigen::Index size = m.dim();
    for (size_t w = 0; w < povms.size(); ++w) {
        const Povm& povm = *povms[w];
        const Eigen::Index d = m.row_wires[w].dim;
        if (povm.dim() != d) {
            throw DimensionError("POVM dimension does not match wire " + m.row_wires[w].label);
        }
        const Eigen::Index rest = size / d;
        std::vector<Matrix> next;
        next.reserve(level.size() * povm.effects.size());
        for (const auto& x : level) {
            for (const auto& e : povm.effects) {
                Matrix y = Matrix::Zero(rest, rest);
                for (Eigen::Index i = 0; i < d; ++i) {
                    for (Eigen::Index j = 0; j < d; ++j) {
                        if (e(j, i) != 0.0) {
                            y += e(j, i) * x.block(i * rest, j * rest, rest, rest);
                        }
                    }
                }
                next.push_back(std::move(y));
            }
        }
        level = std::move(next);
        size = rest;
    }
    std::vector<double> out;
    out.reserve(level.size());
    for (const auto& x : level) {
        out.push_back(x(0, 0).real());
    }
    return out;
}

std::vector<double> outcome_distribution(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                                         const std::vector<Povm>& out_povms) {
    if (in_povms.size() != p.inputs.size() || out_povms.size() != p.outputs.size()) {
        throw DimensionError("need one POVM per input and per output wire");
    }
    std::vector<const Povm*> ptrs;
    for (const auto& pv : in_povms) {
        ptrs.push_back(&pv);
    }
    for (const auto& pv : out_povms) {
        ptrs.push_back(&pv);
    }
    return product_distribution(p.choi, ptrs);
}

OutcomeMatrix sample_outcome_matrix(const ProcessMatrix& p, const std::vector<Povm>& in_povms,
                                    const std::vector<Povm>& out_povms, std::int64_t n_rows, Rng& rng,
                                    int threads) {
    if (n_rows < 1) {
        throw std::invalid_argument("outcome matrix needs at least one row");
    }
    std::vector<double> joint = outcome_distribution(p, in_povms, out_povms);
    const size_t n_in = in_povms.size();
    const size_t n_out = out_povms.size();
    size_t t_in = 1, t_out = 1;
    for (const auto& pv : in_povms) {
        t_in *= static_cast<size_t>(pv.size());
    }
    for (const auto& pv : out_povms) {
        t_out *= static_cast<size_t>(pv.size());
    }
    // Input labels are drawn with weight Tr[P_a]/d; outputs from Pr(b | a).
    std::vector<std::vector<double>> in_cdf;
    for (const auto& pv : in_povms) {
        std::vector<double> w;
        for (const auto& e : pv.effects) {
            w.push_back(e.trace().real() / pv.dim());
        }
        in_cdf.push_back(cumulative(w.data(), w.size()));
    }
    std::vector<std::vector<double>> out_cdf(t_in);
    for (size_t t = 0; t < t_in; ++t) {
        out_cdf[t] = cumulative(joint.data() + t * t_out, t_out);
    }

    OutcomeMatrix result;
    result.wires = p.inputs;
    result.wires.insert(result.wires.end(), p.outputs.begin(), p.outputs.end());
    result.povms = in_povms;
    result.povms.insert(result.povms.end(), out_povms.begin(), out_povms.end());
    result.rows = n_rows;
    result.data.assign(static_cast<size_t>(n_rows) * (n_in + n_out), 0);

    auto fill = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t r = begin; r < end; ++r) {
            Rng row_rng = rng.substream(static_cast<std::uint64_t>(r));
            std::uint16_t* row = result.data.data() + static_cast<size_t>(r) * (n_in + n_out);
            size_t tuple = 0;
            for (size_t i = 0; i < n_in; ++i) {
                int a = draw_index(in_cdf[i], row_rng.uniform());
                row[i] = static_cast<std::uint16_t>(a);
                tuple = tuple * static_cast<size_t>(in_povms[i].size()) + static_cast<size_t>(a);
            }
            size_t b = static_cast<size_t>(draw_index(out_cdf[tuple], row_rng.uniform()));
            for (size_t j = n_out; j-- > 0;) {
                const size_t m = static_cast<size_t>(out_povms[j].size());
                row[n_in + j] = static_cast<std::uint16_t>(b % m);
                b /= m;
            }
        }
    };
    const int workers = std::max(1, threads);
    if (workers == 1) {
        fill(0, n_rows);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n_rows + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            std::int64_t begin = std::min<std::int64_t>(n_rows, w * chunk);
            std::int64_t end = std::min<std::int64_t>(n_rows, begin + chunk);
            pool.emplace_back(fill, begin, end);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return result;
}

}  // namespace qunravel
