#include "qunravel/io.hpp"

#include <fstream>
#include <ostream>

namespace qunravel {

namespace {

json wires_to_json(const Wires& wires) {
    json out = json::array();
    for (const auto& w : wires) {
        out.push_back(wire_to_json(w));
    }
    return out;
}

Wires wires_from_json(const json& j, Direction direction) {
    Wires out;
    for (const auto& item : j) {
        WireSystem w = wire_from_json(item);
        w.direction = direction;
        out.push_back(w);
    }
    return out;
}

Wires wires_from_json(const json& j) {
    Wires out;
    for (const auto& item : j) {
        out.push_back(wire_from_json(item));
    }
    return out;
}

json labels_to_json(const Labels& labels) { return json(labels); }

const char* mode_name(Mode m) { return m == Mode::exact ? "exact" : "sampled"; }

}  // namespace

json wire_to_json(const WireSystem& w) {
    return {{"label", w.label}, {"dim", w.dim}, {"direction", w.direction == Direction::input ? "input" : "output"}};
}

WireSystem wire_from_json(const json& j) {
    WireSystem w;
    w.label = j.at("label").get<std::string>();
    w.dim = j.at("dim").get<int>();
    std::string dir = j.value("direction", "input");
    if (dir != "input" && dir != "output") {
        throw LabelError("wire direction must be input or output, got " + dir);
    }
    w.direction = dir == "input" ? Direction::input : Direction::output;
    return w;
}

json matrix_to_json(const Matrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json rr = json::array(), ir = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            rr.push_back(m(i, k).real());
            ir.push_back(m(i, k).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ir));
    }
    return {{"re", std::move(re)}, {"im", std::move(im)}};
}

Matrix matrix_from_json(const json& j) {
    const json& re = j.at("re");
    const json* im = j.contains("im") ? &j.at("im") : nullptr;
    const auto rows = static_cast<Eigen::Index>(re.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(re.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(re.at(i).size()) != cols) {
            throw DimensionError("ragged matrix rows in JSON");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            double imag = im ? im->at(i).at(k).get<double>() : 0.0;
            m(i, k) = cplx(re.at(i).at(k).get<double>(), imag);
        }
    }
    return m;
}

json labelled_to_json(const LabelledMatrix& m) {
    json out = matrix_to_json(m.entries);
    out["wires"] = wires_to_json(m.row_wires);
    if (m.col_wires != m.row_wires) {
        out["col_wires"] = wires_to_json(m.col_wires);
    }
    return out;
}

LabelledMatrix labelled_from_json(const json& j) {
    Wires rows = wires_from_json(j.at("wires"));
    Wires cols = j.contains("col_wires") ? wires_from_json(j.at("col_wires")) : rows;
    return LabelledMatrix(matrix_from_json(j), std::move(rows), std::move(cols));
}

json process_to_json(const ProcessMatrix& p) {
    return {{"inputs", wires_to_json(p.inputs)},
            {"outputs", wires_to_json(p.outputs)},
            {"repr", "choi"},
            {"choi", labelled_to_json(p.choi)}};
}

ProcessMatrix process_from_json(const json& j) {
    Wires ins = wires_from_json(j.at("inputs"), Direction::input);
    Wires outs = wires_from_json(j.at("outputs"), Direction::output);
    const std::string repr = j.value("repr", "choi");
    if (repr == "kraus") {
        std::vector<Matrix> kraus;
        for (const auto& k : j.at("kraus")) {
            kraus.push_back(matrix_from_json(k));
        }
        return choi_from_kraus(kraus, ins, outs);
    }
    if (repr != "choi") {
        throw std::invalid_argument("unknown process representation " + repr);
    }
    const json& c = j.at("choi");
    Matrix m = matrix_from_json(c);
    if (c.contains("wires")) {
        Wires listed = wires_from_json(c.at("wires"));
        Wires expected = ins;
        expected.insert(expected.end(), outs.begin(), outs.end());
        if (labels_of(listed) != labels_of(expected)) {
            throw LabelError("choi wires must be the inputs followed by the outputs");
        }
    }
    return make_process(std::move(m), std::move(ins), std::move(outs));
}

json comb_to_json(const Comb& comb) {
    json teeth = json::array();
    for (const auto& t : comb.teeth) {
        json kraus = json::array();
        for (const auto& k : t.kraus) {
            kraus.push_back(matrix_to_json(k));
        }
        teeth.push_back({{"kraus", std::move(kraus)},
                         {"in_wires", wires_to_json(t.in_wires)},
                         {"out_wires", wires_to_json(t.out_wires)},
                         {"mem_in", t.mem_in},
                         {"mem_out", t.mem_out}});
    }
    return {{"teeth", std::move(teeth)}, {"d_env", comb.d_env()}};
}

Comb comb_from_json(const json& j) {
    Comb comb;
    for (const auto& t : j.at("teeth")) {
        Tooth tooth;
        for (const auto& k : t.at("kraus")) {
            tooth.kraus.push_back(matrix_from_json(k));
        }
        tooth.in_wires = wires_from_json(t.at("in_wires"), Direction::input);
        tooth.out_wires = wires_from_json(t.at("out_wires"), Direction::output);
        tooth.mem_in = t.at("mem_in").get<int>();
        tooth.mem_out = t.at("mem_out").get<int>();
        comb.teeth.push_back(std::move(tooth));
    }
    if (j.contains("d_env") && j.at("d_env").get<int>() != comb.d_env()) {
        throw DimensionError("d_env does not match the last tooth's memory output");
    }
    return comb;
}

ProcessMatrix load_process(const json& j) {
    if (j.contains("teeth")) {
        return canonicalize(compose_comb(comb_from_json(j)));
    }
    return canonicalize(process_from_json(j));
}

json steps_to_json(const Unravelling& u) {
    json steps = json::array();
    for (const auto& s : u.steps) {
        steps.push_back({{"inputs", labels_to_json(s.inputs)}, {"outputs", labels_to_json(s.outputs)}});
    }
    return steps;
}

Unravelling steps_from_json(const json& j) {
    Unravelling u;
    for (const auto& s : j) {
        u.steps.push_back({s.at("inputs").get<Labels>(), s.at("outputs").get<Labels>()});
    }
    return u;
}

json result_to_json(const UnravelResult& r) {
    json out;
    out["algorithm"] = r.algorithm;
    out["steps"] = steps_to_json(r.unravelling);
    out["mode"] = mode_name(r.mode);
    out["queries"] = r.queries;
    out["warnings"] = r.warnings;
    json cert = json::array();
    for (const auto& e : r.certificate) {
        cert.push_back({{"k", e.k}, {"eta", e.eta}, {"r", e.r}});
    }
    out["certificate"] = std::move(cert);
    out["error_bound"] = r.error_bound ? json(*r.error_bound) : json(nullptr);
    if (r.calibration) {
        const auto& c = *r.calibration;
        out["calibration"] = {{"delta", c.delta},   {"eps", c.eps}, {"kappa", c.kappa},
                              {"swap_runs", c.swap_runs}, {"d_A", c.d_A}, {"n", c.n},
                              {"cert_rank", c.cert_rank}, {"checks", r.checks}};
    }
    if (r.ind) {
        out["independence"] = {{"chi_minus", r.ind->chi_minus}, {"chi_hat", r.ind->chi_hat}, {"ind", r.ind->ind}};
    }
    if (r.rows) {
        out["rows"] = *r.rows;
    }
    return out;
}

Unravelling unravelling_from_json(const json& j) {
    if (j.contains("steps")) {
        return steps_from_json(j.at("steps"));
    }
    if (j.contains("ordering")) {
        return steps_from_json(j.at("ordering"));
    }
    throw std::invalid_argument("document has neither steps nor ordering");
}

json truth_to_json(const SynthResult& s) {
    return {{"ordering", steps_to_json(s.truth)}, {"chi_min_achieved", s.chi_min_achieved}, {"kraus_rank", s.kraus_rank}};
}

json povm_to_json(const Povm& povm) {
    json effects = json::array();
    for (const auto& e : povm.effects) {
        effects.push_back(matrix_to_json(e));
    }
    return {{"dim", povm.dim()}, {"effects", std::move(effects)}};
}

json outcome_povms_to_json(const OutcomeMatrix& m) {
    json cols = json::array();
    for (int c = 0; c < m.cols(); ++c) {
        cols.push_back({{"wire", wire_to_json(m.wires[static_cast<size_t>(c)])},
                        {"povm", povm_to_json(m.povms[static_cast<size_t>(c)])}});
    }
    return {{"rows", m.rows}, {"index_base", 1}, {"columns", std::move(cols)}};
}

void write_outcome_csv(std::ostream& out, const OutcomeMatrix& m) {
    out << "trial";
    for (const auto& w : m.wires) {
        out << ',' << w.label;
    }
    out << '\n';
    for (std::int64_t r = 0; r < m.rows; ++r) {
        out << r + 1;
        for (int c = 0; c < m.cols(); ++c) {
            out << ',' << m.at(r, c) + 1;
        }
        out << '\n';
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path);
    }
    return json::parse(in);
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

}  // namespace qunravel
