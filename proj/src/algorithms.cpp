#include "qunravel/algorithms.hpp"

#include <cassert>
#include <cmath>
#include <functional>

namespace qunravel {

namespace {

// Calls `visit` on every size-k subset of `items` in lexicographic index order
// until it returns true.
bool for_each_subset(const Labels& items, int k, const std::function<bool(const Labels&)>& visit) {
    const int n = static_cast<int>(items.size());
    if (k < 1 || k > n) {
        return false;
    }
    std::vector<int> idx(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        idx[static_cast<size_t>(i)] = i;
    }
    while (true) {
        Labels subset;
        for (int i : idx) {
            subset.push_back(items[static_cast<size_t>(i)]);
        }
        if (visit(subset)) {
            return true;
        }
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - k + pos) {
            --pos;
        }
        if (pos < 0) {
            return false;
        }
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < k; ++i) {
            idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
        }
    }
}

std::string join(const Labels& labels) {
    std::string out = "{";
    for (size_t i = 0; i < labels.size(); ++i) {
        out += (i ? "," : "") + labels[i];
    }
    return out + "}";
}

UnravelResult unravel_scan(const ProcessMatrix& p, const UnravelParams& params, const std::string& algorithm) {
    if (params.c < 1) {
        throw std::invalid_argument("partition-size cap c must be at least 1");
    }
    UnravelResult result;
    result.algorithm = algorithm;
    result.mode = params.mode;
    const Calibration cal = calibrate(params, p);
    result.calibration = cal;
    ProcessOracle oracle(params, cal);

    std::vector<Step> reversed;
    ProcessMatrix current = p;
    while (true) {
        const Labels ins = current.input_labels();
        const Labels outs = current.output_labels();
        if (ins.empty() && outs.empty()) {
            break;
        }
        if (ins.size() <= 1 && outs.size() <= 1) {
            reversed.push_back({ins, outs});
            break;
        }
        std::optional<Step> found;
        for (int cp = 1; cp <= params.c && !found; ++cp) {
            for (int cq = 1; cq <= params.c && !found; ++cq) {
                // A step may not leave inputs without outputs or the reverse.
                const bool no_in = ins.size() == static_cast<size_t>(cp);
                const bool no_out = outs.size() == static_cast<size_t>(cq);
                if (cp > static_cast<int>(ins.size()) || cq > static_cast<int>(outs.size()) || no_in != no_out) {
                    continue;
                }
                for_each_subset(ins, cp, [&](const Labels& P) {
                    return for_each_subset(outs, cq, [&](const Labels& Q) {
                        CheckRecord rec = oracle.check_last(current, P, Q);
                        result.trace.push_back(rec);
                        if (!rec.passed) {
                            return false;
                        }
                        if (params.certify) {
                            LabelledMatrix marg =
                                partial_trace(current.choi, labels_of(remove_wires(current.choi.row_wires, Q)));
                            double eta = eigen_tail_norm(marg, cal.cert_rank);
                            if (!check_rank_certificate(marg, params.eta_max, cal.cert_rank)) {
                                result.warnings.push_back("rank certificate failed for candidate " + join(P) + "->" +
                                                          join(Q) + " (eta " + std::to_string(eta) + ")");
                                return false;
                            }
                            result.certificate.push_back({static_cast<int>(ins.size()), eta, rank_eta(marg, eta)});
                        }
                        assert(params.mode != Mode::exact || is_last_tooth_exact(current, P, Q, params.tol));
                        found = Step{P, Q};
                        return true;
                    });
                });
            }
        }
        if (!found) {
            result.warnings.push_back("no last tooth with at most " + std::to_string(params.c) +
                                      " wires per side among " + join(ins) + "/" + join(outs) +
                                      "; emitting trivial step");
            reversed.push_back({ins, outs});
            break;
        }
        reversed.push_back(*found);
        current = reduce_channel(current, found->inputs, found->outputs);
    }
    result.unravelling.steps.assign(reversed.rbegin(), reversed.rend());
    result.queries = oracle.queries();
    result.checks = oracle.checks();
    if (params.certify) {
        result.error_bound = error_bound_approximate(result.certificate, static_cast<int>(result.unravelling.steps.size()));
    }
    return result;
}

}  // namespace

Calibration calibrate(const UnravelParams& params, const ProcessMatrix& p) {
    Calibration cal;
    cal.n = static_cast<int>(std::max(p.inputs.size(), p.outputs.size()));
    cal.d_A = p.max_dim();
    cal.cert_rank = params.cert_rank.value_or(cal.d_A * params.rank_bound.value_or(1));
    if (params.rank_bound) {
        if (*params.rank_bound < 1) {
            throw std::invalid_argument("rank bound must be at least 1");
        }
        cal.delta = params.chi_min * params.chi_min / (8.0 * cal.d_A * *params.rank_bound);
        cal.eps = cal.delta / 5.0;
    } else {
        cal.delta = 2.0 * params.eta_max * params.eta_max;
        cal.eps = cal.delta / 4.0;
    }
    if (params.delta) {
        cal.delta = *params.delta;
    }
    if (params.eps) {
        cal.eps = *params.eps;
    }
    const double n = std::max(cal.n, 1);
    const double tests = params.c <= 1 ? n * n * n : std::pow(n, 2 * params.c + 1);
    cal.kappa = params.kappa0 / (3.0 * tests);
    if (params.mode == Mode::sampled) {
        cal.swap_runs = swap_test_runs(cal.eps, cal.kappa);
    }
    return cal;
}

ProcessOracle::ProcessOracle(const UnravelParams& params, const Calibration& cal)
    : mode_(params.mode), tol_(params.tol), cal_(cal), rng_(params.seed) {}

CheckRecord ProcessOracle::check_last(const ProcessMatrix& p, const Labels& P, const Labels& Q) {
    auto [first, second] = last_tooth_states(p, P, Q);
    CheckRecord rec;
    rec.P = P;
    rec.Q = Q;
    const Matrix diff = first.entries - second.entries;
    rec.chi = trace_norm(diff);
    rec.rank = matrix_rank(first);
    rec.t1 = (first.entries * first.entries).trace().real();
    rec.t2 = (second.entries * second.entries).trace().real();
    rec.t3 = (first.entries * second.entries).trace().real();
    if (mode_ == Mode::exact) {
        rec.statistic = rec.chi;
        rec.passed = rec.chi <= tol_;
        rec.p1 = rec.t1;
        rec.p2 = rec.t2;
        rec.p3 = rec.t3;
    } else {
        const std::uint64_t base = static_cast<std::uint64_t>(checks_) * 3;
        Rng r1 = rng_.substream(base), r2 = rng_.substream(base + 1), r3 = rng_.substream(base + 2);
        rec.p1 = swaptest_estimate(first.entries, first.entries, cal_.eps, cal_.kappa, r1);
        rec.p2 = swaptest_estimate(second.entries, second.entries, cal_.eps, cal_.kappa, r2);
        rec.p3 = swaptest_estimate(first.entries, second.entries, cal_.eps, cal_.kappa, r3);
        rec.statistic = rec.p1 + rec.p2 - 2.0 * rec.p3;
        rec.passed = rec.statistic <= cal_.delta;
        rec.within_eps = std::abs(rec.p1 - rec.t1) <= cal_.eps && std::abs(rec.p2 - rec.t2) <= cal_.eps &&
                         std::abs(rec.p3 - rec.t3) <= cal_.eps;
        // Each SWAP run consumes one copy of each of its two input states.
        queries_ += 3 * 2 * cal_.swap_runs;
    }
    ++checks_;
    return rec;
}

CheckRecord check_last(const ProcessMatrix& p, const Labels& P, const Labels& Q, const UnravelParams& params) {
    if (static_cast<int>(P.size()) > params.c || static_cast<int>(Q.size()) > params.c) {
        throw std::invalid_argument("candidate step exceeds the partition-size cap");
    }
    ProcessOracle oracle(params, calibrate(params, p));
    return oracle.check_last(p, P, Q);
}

UnravelResult unravel_recursive(const ProcessMatrix& p, UnravelParams params) {
    params.c = 1;
    return unravel_scan(p, params, "recursive");
}

UnravelResult unravel_general_c(const ProcessMatrix& p, const UnravelParams& params) {
    return unravel_scan(p, params, "general-c");
}

bool check_rank_certificate(const LabelledMatrix& marginal, double eta_max, int r_max) {
    return rank_eta(marginal, eta_max) <= r_max;
}

double error_bound_approximate(const RankCertificate& cert, int m) {
    double eta_max = 0.0;
    int r_max = 0;
    for (const auto& e : cert) {
        eta_max = std::max(eta_max, e.eta);
        r_max = std::max(r_max, e.r);
    }
    return 8.0 * std::sqrt(2.0) * m * std::pow(static_cast<double>(r_max), 0.25) * std::sqrt(eta_max);
}

}  // namespace qunravel
