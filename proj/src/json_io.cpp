#include "latpri/json_io.hpp"

#include <fstream>

namespace latpri {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::BadInput, "cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::BadInput, path + ": " + e.what());
  }
  return j;
}

Lattice lattice_from_json(const Json& j) {
  std::vector<std::string> names;
  if (j.contains("names"))
    for (const auto& n : j["names"]) names.push_back(n.get<std::string>());
  std::vector<std::pair<int, int>> covers;
  if (!j.contains("covers"))
    throw Error(ErrorKind::BadInput, "lattice file needs \"covers\"");
  for (const auto& c : j["covers"]) {
    if (!c.is_array() || c.size() != 2)
      throw Error(ErrorKind::BadInput, "cover entries are [lo, hi]");
    int lo, hi;
    if (c[0].is_string()) {
      // resolve names after collecting; two passes keeps this simple
      lo = -1;
      hi = -1;
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == c[0].get<std::string>()) lo = static_cast<int>(i);
        if (names[i] == c[1].get<std::string>()) hi = static_cast<int>(i);
      }
      if (lo < 0 || hi < 0)
        throw Error(ErrorKind::BadInput, "cover names must be declared in names");
    } else {
      lo = c[0].get<int>();
      hi = c[1].get<int>();
    }
    covers.emplace_back(lo, hi);
  }
  return Lattice::from_covers(covers, names);
}

Json lattice_to_json(const Lattice& l) {
  Json j;
  j["format"] = 1;
  j["names"] = Json::array();
  for (int i = 0; i < l.size(); ++i) j["names"].push_back(l.name(i));
  j["covers"] = Json::array();
  for (auto [lo, hi] : l.cover_pairs()) j["covers"].push_back({lo, hi});
  return j;
}

std::vector<ScriptEvent> script_from_json(const Json& j, ChangeBudget* budget) {
  if (budget) {
    *budget = ChangeBudget::Dce;
    if (j.contains("budget") && j["budget"] == "omega") *budget = ChangeBudget::OmegaCe;
  }
  std::vector<ScriptEvent> out;
  const Json& evs = j.contains("events") ? j["events"] : j;
  for (const auto& e : evs)
    out.push_back({e.at("x").get<Point>(), e.at("s").get<int>(), e.at("v").get<int>()});
  return out;
}

Json script_to_json(const std::vector<ScriptEvent>& ev, ChangeBudget budget) {
  Json j;
  j["format"] = 1;
  j["budget"] = budget == ChangeBudget::Dce ? "dce" : "omega";
  j["events"] = Json::array();
  for (const auto& e : ev)
    j["events"].push_back({{"x", e.x}, {"s", e.stage}, {"v", e.value}});
  return j;
}

Json tree_to_json(const PriorityTree& t) {
  Json j;
  j["format"] = 1;
  j["m"] = t.m();
  j["u_sets"] = t.u_sets();
  j["truncated"] = t.truncated();
  j["nodes"] = Json::array();
  for (int id = 0; id < t.size(); ++id) {
    const StrategyNode& n = t.node(id);
    Json nj;
    nj["id"] = n.id;
    nj["parent"] = n.parent;
    nj["kind"] = n.is_s ? "S" : "R";
    if (n.is_s) {
      nj["seq"] = Json::array();
      for (auto [a, leaf] : n.seq) nj["seq"].push_back({a, leaf});
    } else {
      nj["e"] = n.rlist_index;
      nj["c"] = t.itree().c_name(n.c);
      nj["psi"] = n.psi;
    }
    nj["outcomes"] = Json::array();
    for (const auto& o : n.outcomes) {
      Json oj;
      switch (o.kind) {
        case OutcomeKind::U:
          oj["kind"] = "U" + std::to_string(o.level);
          oj["type"] = o.utype == UType::TypeI ? "I" : "II";
          if (o.utype == UType::TypeII) oj["red"] = o.base_red;
          break;
        case OutcomeKind::Ctr: oj["kind"] = "ctr"; break;
        case OutcomeKind::W: oj["kind"] = "w"; break;
        case OutcomeKind::D: oj["kind"] = "d"; break;
        case OutcomeKind::S0: oj["kind"] = "0"; break;
        case OutcomeKind::Invalid: oj["kind"] = "invalid"; break;
      }
      oj["child"] = o.child;
      if (o.terminal) oj["terminal"] = true;
      if (o.truncated) oj["truncated"] = true;
      nj["outcomes"].push_back(oj);
    }
    j["nodes"].push_back(nj);
  }
  return j;
}

}  // namespace latpri
