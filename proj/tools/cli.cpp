#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qunravel/algorithms.hpp"
#include "qunravel/io.hpp"
#include "qunravel/synth.hpp"

namespace qunravel::cli {

namespace {

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Globals {
    std::uint64_t seed = 0;
    int threads = 1;
    double tol = kFactorTol;
    bool seed_given = false;
};

struct GenerateArgs {
    std::string family = "isometric-chain";
    int n = 3;
    int dim = 2;
    int mem_dim = 2;
    int d_env = 1;
    double chi_min_target = 0.1;
    std::string out = "comb.json";
};

struct UnravelArgs {
    std::string process;
    std::string algorithm = "recursive";
    std::string mode = "exact";
    int c = 1;
    double chi_min = 0.1;
    double kappa = 0.05;
    std::optional<int> rank_bound;
    double eta_max = 1e-2;
    bool certify = false;
    std::optional<int> cert_rank;
    std::optional<std::int64_t> queries;
    std::string out;
};

struct VerifyArgs {
    std::string process;
    std::string unravelling;
};

struct SampleArgs {
    std::string process;
    std::int64_t queries = 0;
    std::string out = "outcomes.csv";
};

struct ReportArgs {
    std::string result;
};

std::string join(const Labels& labels) {
    std::string out = "{";
    for (size_t i = 0; i < labels.size(); ++i) {
        out += (i ? "," : "") + labels[i];
    }
    return out + "}";
}

std::string fmt(double x, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << x;
    return s.str();
}

const std::map<std::string, Family>& family_names() {
    static const std::map<std::string, Family> names{{"isometric-chain", Family::isometric_chain},
                                                     {"memoryless", Family::memoryless},
                                                     {"total-order-chain", Family::total_order_chain},
                                                     {"entangling-c2", Family::entangling_c2}};
    return names;
}

int cmd_generate(const GenerateArgs& a, const Globals& g, std::ostream& out) {
    SynthSpec spec;
    spec.n = a.n;
    spec.d = a.dim;
    spec.d_mem = a.mem_dim;
    spec.d_env = a.d_env;
    spec.chi_min_target = a.chi_min_target;
    spec.seed = g.seed;
    spec.family = family_names().at(a.family);
    if (spec.family == Family::entangling_c2 && spec.n != 3) {
        throw UsageError("entangling-c2 combs have exactly 3 inputs and 3 outputs");
    }
    Rng rng(g.seed);
    SynthResult s = generate(spec, rng);
    const std::string truth_path = sidecar_path(a.out, ".json", ".truth.json");
    write_json_file(a.out, comb_to_json(s.comb));
    write_json_file(truth_path, truth_to_json(s));
    out << "wrote " << a.out << " and " << truth_path << " (chi_min_achieved " << fmt(s.chi_min_achieved)
        << ", kraus_rank " << s.kraus_rank << ")\n";
    return kExitOk;
}

int cmd_unravel(const UnravelArgs& a, const Globals& g, std::ostream& out) {
    const ProcessMatrix p = load_process(read_json_file(a.process));
    const Mode mode = a.mode == "exact" ? Mode::exact : Mode::sampled;
    if (mode == Mode::sampled && !g.seed_given) {
        throw UsageError("--seed is required in sampled mode");
    }
    json params{{"chi_min", a.chi_min},
                {"kappa0", a.kappa},
                {"c", a.algorithm == "general-c" ? a.c : 1},
                {"rank_bound", a.rank_bound ? json(*a.rank_bound) : json(nullptr)},
                {"eta_max", a.eta_max},
                {"certify", a.certify},
                {"seed", g.seed},
                {"tol", g.tol}};
    UnravelResult result;
    if (a.algorithm == "recursive" || a.algorithm == "general-c") {
        UnravelParams up;
        up.chi_min = a.chi_min;
        up.kappa0 = a.kappa;
        up.mode = mode;
        up.c = a.c;
        up.rank_bound = a.rank_bound;
        up.eta_max = a.eta_max;
        up.certify = a.certify;
        up.cert_rank = a.cert_rank;
        up.tol = g.tol;
        up.seed = g.seed;
        result = a.algorithm == "recursive" ? unravel_recursive(p, up) : unravel_general_c(p, up);
    } else {
        std::optional<std::int64_t> rows;
        if (mode == Mode::sampled) {
            // Pairwise estimates must land within chi_min / 2 of the truth.
            const double eps0 = a.chi_min / 2.0;
            const std::int64_t formula_rows = local_sample_count(p, eps0, a.kappa);
            params["eps0"] = eps0;
            params["formula_rows"] = formula_rows;
            rows = a.queries.value_or(formula_rows);
        }
        Rng rng(g.seed);
        result = a.algorithm == "total-order" ? unravel_total_order(p, rows, a.chi_min, rng, g.threads)
                                              : unravel_memoryless(p, rows, a.chi_min / 2.0, rng, g.threads);
    }
    json doc = result_to_json(result);
    doc["parameters"] = std::move(params);
    if (doc.contains("independence")) {
        doc["independence"]["inputs"] = p.input_labels();
        doc["independence"]["outputs"] = p.output_labels();
    }
    if (a.out.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        write_json_file(a.out, doc);
        out << "wrote " << a.out << '\n';
    }
    return kExitOk;
}

int cmd_verify(const VerifyArgs& a, const Globals& g, std::ostream& out) {
    const ProcessMatrix p = load_process(read_json_file(a.process));
    const Unravelling u = unravelling_from_json(read_json_file(a.unravelling));
    validate_unravelling(p, u);
    const MembershipResult m = comb_membership_trace(p, u, g.tol);
    for (size_t k = 0; k < u.steps.size(); ++k) {
        out << "step " << k + 1 << ' ' << join(u.steps[k].inputs) << " -> " << join(u.steps[k].outputs) << ": ";
        if (k == 0) {
            out << "first step, not tested\n";
        } else if (m.failing_step >= 0 && static_cast<int>(k) < m.failing_step) {
            out << "not reached\n";
        } else {
            out << "residual " << fmt(m.residuals[k], 3) << '\n';
        }
    }
    if (m.member) {
        out << "member at tol " << fmt(g.tol, 3) << '\n';
        return kExitOk;
    }
    out << "first failing step: " << m.failing_step + 1 << '\n';
    return kExitVerifyFailed;
}

int cmd_sample(const SampleArgs& a, const Globals& g, std::ostream& out) {
    if (!g.seed_given) {
        throw UsageError("--seed is required for sampling");
    }
    const ProcessMatrix p = load_process(read_json_file(a.process));
    Rng rng(g.seed);
    Rng povm_rng = rng.substream(0);
    Rng sample_rng = rng.substream(1);
    auto [in, outs] = default_povms(p, povm_rng);
    const OutcomeMatrix m = sample_outcome_matrix(p, in, outs, a.queries, sample_rng, g.threads);
    std::ofstream csv(a.out);
    if (!csv) {
        throw std::invalid_argument("cannot write " + a.out);
    }
    write_outcome_csv(csv, m);
    const std::string sidecar = sidecar_path(a.out, ".csv", ".povm.json");
    write_json_file(sidecar, outcome_povms_to_json(m));
    out << "wrote " << a.out << " (" << m.rows << " rows) and " << sidecar << '\n';
    return kExitOk;
}

void print_chi_table(const json& ind, std::ostream& out) {
    const auto ins = ind.at("inputs").get<Labels>();
    const auto outs = ind.at("outputs").get<Labels>();
    const auto chi = ind.at("chi_hat").get<std::vector<std::vector<double>>>();
    const auto dep = ind.at("ind").get<std::vector<std::vector<bool>>>();
    size_t w = 4;
    for (const auto& l : ins) {
        w = std::max(w, l.size());
    }
    out << "chi_hat (threshold " << fmt(ind.at("chi_minus").get<double>(), 4) << ", * = signalling):\n";
    out << std::string(w + 2, ' ');
    for (const auto& l : outs) {
        out << std::setw(10) << l;
    }
    out << '\n';
    for (size_t i = 0; i < ins.size(); ++i) {
        out << "  " << std::left << std::setw(static_cast<int>(w)) << ins[i] << std::right;
        for (size_t j = 0; j < outs.size(); ++j) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(4) << chi[i][j] << (dep[i][j] ? ' ' : '*');
            out << std::setw(10) << cell.str();
        }
        out << '\n';
    }
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const json doc = read_json_file(a.result);
    const std::string mode = doc.at("mode").get<std::string>();
    out << "algorithm: " << doc.value("algorithm", "unknown") << '\n';
    out << "mode: " << mode << '\n';
    const Unravelling u = steps_from_json(doc.at("steps"));
    out << "ordering (first step acts first):\n";
    for (size_t k = 0; k < u.steps.size(); ++k) {
        out << "  " << k + 1 << ": " << join(u.steps[k].inputs) << " -> " << join(u.steps[k].outputs) << '\n';
    }
    if (doc.contains("independence")) {
        print_chi_table(doc.at("independence"), out);
    }
    const auto queries = doc.at("queries").get<std::int64_t>();
    if (mode == "exact") {
        out << "queries: 0 (exact mode)\n";
    } else {
        out << "queries: " << queries << '\n';
        const json params = doc.value("parameters", json::object());
        if (doc.contains("calibration")) {
            const json& c = doc.at("calibration");
            const int n = c.at("n").get<int>();
            const int cap = params.value("c", 1);
            const auto runs = c.at("swap_runs").get<std::int64_t>();
            const double tests = cap <= 1 ? std::pow(n, 3) : std::pow(n, 2 * cap + 1);
            out << "budget: 3 * n^" << (cap <= 1 ? 3 : 2 * cap + 1) << " * N = " << fmt(3.0 * tests * runs, 12)
                << " with N = ceil(2 eps^-2 ln(2/kappa)) = " << runs << ", n = " << n << ", eps = " << fmt(c.at("eps").get<double>())
                << ", kappa = " << fmt(c.at("kappa").get<double>()) << ", delta = " << fmt(c.at("delta").get<double>())
                << '\n';
        } else if (params.contains("formula_rows")) {
            out << "budget: N = ceil(ln(2 (dA^2 dB^2 + dA^2 + dB^2) / kappa0) / (2 xi^2 eps0^2)) = "
                << params.at("formula_rows").get<std::int64_t>() << " with eps0 = " << fmt(params.at("eps0").get<double>())
                << ", kappa0 = " << fmt(params.at("kappa0").get<double>()) << "; rows used: " << queries << '\n';
        }
    }
    const auto warnings = doc.value("warnings", std::vector<std::string>{});
    out << "warnings: " << (warnings.empty() ? "none" : std::to_string(warnings.size())) << '\n';
    for (const auto& w : warnings) {
        out << "  - " << w << '\n';
    }
    const json& cert = doc.at("certificate");
    if (!cert.empty()) {
        double eta_max = 0.0;
        int r_max = 0;
        out << "certificate:\n";
        for (const auto& e : cert) {
            out << "  k = " << e.at("k").get<int>() << ": eta = " << fmt(e.at("eta").get<double>())
                << ", r = " << e.at("r").get<int>() << '\n';
            eta_max = std::max(eta_max, e.at("eta").get<double>());
            r_max = std::max(r_max, e.at("r").get<int>());
        }
        const size_t m = u.steps.size();
        const double bound = error_bound_approximate(RankCertificate{{0, eta_max, r_max}}, static_cast<int>(m));
        out << "error bound: 8 sqrt(2) m r_max^(1/4) eta_max^(1/2) = " << fmt(bound) << " with m = " << m
            << ", r_max = " << r_max << ", eta_max = " << fmt(eta_max) << '\n';
    } else if (!doc.at("error_bound").is_null()) {
        out << "error bound: " << fmt(doc.at("error_bound").get<double>()) << '\n';
    }
    return kExitOk;
}

}  // namespace

std::string sidecar_path(const std::string& path, const std::string& ext, const std::string& suffix) {
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
        return path.substr(0, path.size() - ext.size()) + suffix;
    }
    return path + suffix;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal unravelling of quantum processes"};
    app.name("qunravel");
    app.require_subcommand(1);
    Globals g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Seed of all random draws");
    app.add_option("--threads", g.threads, "Worker threads for sampling")->check(CLI::PositiveNumber);
    app.add_option("--tol", g.tol, "Factorization tolerance in exact mode")->check(CLI::PositiveNumber);

    std::vector<std::string> family_keys;
    for (const auto& [k, v] : family_names()) {
        family_keys.push_back(k);
    }

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "Write a random comb and its ground-truth ordering")->fallthrough();
    gen->add_option("--family", ga.family)->check(CLI::IsMember(family_keys));
    gen->add_option("--n", ga.n, "Number of teeth")->check(CLI::Range(1, 16));
    gen->add_option("--dim", ga.dim, "Wire dimension")->check(CLI::Range(2, 16));
    gen->add_option("--mem-dim", ga.mem_dim, "Memory dimension between teeth")->check(CLI::Range(1, 16));
    gen->add_option("--d-env", ga.d_env, "Environment dimension after the last tooth")->check(CLI::Range(1, 16));
    gen->add_option("--chi-min-target", ga.chi_min_target)->check(CLI::Range(0.0, 2.0));
    gen->add_option("--out", ga.out, "Comb JSON path; the truth goes to <stem>.truth.json");

    UnravelArgs ua;
    auto* unr = app.add_subcommand("unravel", "Find a causal unravelling")->fallthrough();
    unr->add_option("--process", ua.process, "Process or comb JSON")->required();
    unr->add_option("--algorithm", ua.algorithm)
        ->check(CLI::IsMember({"recursive", "total-order", "memoryless", "general-c"}));
    unr->add_option("--mode", ua.mode)->check(CLI::IsMember({"exact", "sampled"}));
    unr->add_option("--c", ua.c, "Largest subset per step (general-c)")->check(CLI::Range(1, 16));
    unr->add_option("--chi-min", ua.chi_min)->check(CLI::Range(1e-12, 2.0));
    unr->add_option("--kappa", ua.kappa, "Overall failure probability")->check(CLI::Range(1e-300, 1.0));
    unr->add_option("--rank-bound", ua.rank_bound)->check(CLI::PositiveNumber);
    unr->add_option("--eta-max", ua.eta_max)->check(CLI::Range(0.0, 2.0));
    unr->add_flag("--certify", ua.certify, "Check the low-rank certificate at every step");
    unr->add_option("--cert-rank", ua.cert_rank)->check(CLI::PositiveNumber);
    unr->add_option("--queries", ua.queries, "Outcome rows for the local algorithms")->check(CLI::PositiveNumber);
    unr->add_option("--out", ua.out, "Result JSON path (stdout if absent)");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Check an unravelling against a process")->fallthrough();
    ver->add_option("--process", va.process)->required();
    ver->add_option("--unravelling,--ordering", va.unravelling, "Result or truth JSON")->required();

    SampleArgs sa;
    auto* smp = app.add_subcommand("sample", "Write a local-measurement outcome matrix")->fallthrough();
    smp->add_option("--process", sa.process)->required();
    smp->add_option("--queries", sa.queries, "Number of rows")->required()->check(CLI::PositiveNumber);
    smp->add_option("--out", sa.out, "CSV path; POVMs go to <stem>.povm.json");

    ReportArgs ra;
    auto* rep = app.add_subcommand("report", "Summarize a result JSON")->fallthrough();
    rep->add_option("--result", ra.result)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (gen->parsed()) {
            return cmd_generate(ga, g, out);
        }
        if (unr->parsed()) {
            return cmd_unravel(ua, g, out);
        }
        if (ver->parsed()) {
            return cmd_verify(va, g, out);
        }
        if (smp->parsed()) {
            return cmd_sample(sa, g, out);
        }
        return cmd_report(ra, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "malformed input: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitUsage;
}

}  // namespace qunravel::cli
