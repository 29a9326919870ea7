#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "latpri/dce_sets.hpp"
#include "latpri/lattice.hpp"
#include "latpri/priority_tree.hpp"

namespace latpri {

using Json = nlohmann::ordered_json;

Lattice lattice_from_json(const Json& j);
Json lattice_to_json(const Lattice& l);

std::vector<ScriptEvent> script_from_json(const Json& j, ChangeBudget* budget);
Json script_to_json(const std::vector<ScriptEvent>& ev, ChangeBudget budget);

Json tree_to_json(const PriorityTree& t);

Json load_json_file(const std::string& path);

}  // namespace latpri
