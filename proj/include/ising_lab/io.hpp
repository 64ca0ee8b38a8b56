#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "ising_lab/circuit.hpp"
#include "ising_lab/ising_model.hpp"

namespace ising_lab {

// Model interchange format:
//   {"lattice": {"dims": [..], "periodic": [..]}
//             | {"irregular": {"vertices": n, "edges": [[i, j], ..]}},
//    "couplings": [..], "fields": [..]}
// Complex values may be given as [re, im] pairs.

nlohmann::json lattice_to_json(const Lattice& lattice);
Lattice lattice_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const IsingModel& model);
nlohmann::json model_to_json(const ComplexIsingModel& model);
IsingModel model_from_json(const nlohmann::json& j);
ComplexIsingModel complex_model_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text, bool force);

// Program format: {"lattice": {..}} or {"model": "file.json"} for the qubit
// layout, then either
//   "layers": [{"kind": "diagonal", "alpha": a, "couplings": [..], "fields": [..], "offsets": [..]},
//              {"kind": "rotation" | "phase" | "g", "angles": [..]}, ..]
// or "layered": {"alpha": [..], "couplings": [[..]], "fields": [[..]], "offsets": [[..]], "angles": [[..]]}.
// Relative model paths resolve against base_dir.
nlohmann::json program_to_json(const CircuitProgram& program);
CircuitProgram program_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
LayeredSpec layered_from_json(const nlohmann::json& j, const Lattice& lattice);

nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j);

}  // namespace ising_lab
