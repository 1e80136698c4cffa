#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "qunravel/algorithms.hpp"
#include "qunravel/channels.hpp"
#include "qunravel/sampling.hpp"
#include "qunravel/synth.hpp"

namespace qunravel {

using nlohmann::json;

json wire_to_json(const WireSystem& w);
WireSystem wire_from_json(const json& j);

// {"re": [[...]], "im": [[...]]}, row-major.
json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j);

json labelled_to_json(const LabelledMatrix& m);
LabelledMatrix labelled_from_json(const json& j);

json process_to_json(const ProcessMatrix& p);
// Accepts the choi and kraus representations.
ProcessMatrix process_from_json(const json& j);

json comb_to_json(const Comb& comb);
Comb comb_from_json(const json& j);

// Reads either a process or a comb document; combs are composed, and both are
// returned with canonical wire order.
ProcessMatrix load_process(const json& j);

json steps_to_json(const Unravelling& u);
Unravelling steps_from_json(const json& j);
json result_to_json(const UnravelResult& r);
// Reads "steps" from a result document or "ordering" from a truth document.
Unravelling unravelling_from_json(const json& j);

json truth_to_json(const SynthResult& s);

json povm_to_json(const Povm& povm);
json outcome_povms_to_json(const OutcomeMatrix& m);
void write_outcome_csv(std::ostream& out, const OutcomeMatrix& m);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace qunravel
