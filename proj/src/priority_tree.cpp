#include "latpri/priority_tree.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace latpri {

namespace {

std::vector<FunctionalSpec> family_at(const IntervalTree& t, int leaf_index) {
  return t.functional_family(t.leaves()[leaf_index]);
}

}  // namespace

PriorityTree::PriorityTree(const IntervalTree& itree, TreeOptions opt)
    : itree_(&itree), u_sets_(opt.u_sets), budget_(opt.node_budget),
      omega_(opt.omega_invalid_outcomes) {
  const Lattice& l = itree.lattice();
  for (const auto& sigma : itree.internal_sites()) {
    Elem c = itree.c_label(sigma);
    if (itree.ji_site().at(c) == sigma) ji_order_.push_back(c);
  }
  m_ = opt.m > 0 ? opt.m : static_cast<int>(l.ji().size()) + 1;
  if (u_sets_ < 1) u_sets_ = 1;
  for (Elem c : ji_order_) rmaps_.push_back(r_map(itree, c));
  r_list_ = opt.r_list;
  iota_ = 0;

  StrategyNode root;
  root.id = 0;
  root.depth = 0;
  root.is_s = true;
  root.seq = {{0, iota_}};
  root.outcomes.push_back(
      {OutcomeKind::S0, -1, UType::TypeI, false, -1, false, false, {}});
  if (omega_)
    root.outcomes.push_back(
        {OutcomeKind::Invalid, -1, UType::TypeI, false, -1, true, false, {}});
  nodes_.push_back(std::move(root));
}

// outcomes of a freshly materialized R-node, in left-to-right order
void PriorityTree::build_outcomes(int id) const {
  StrategyNode& n = nodes_[id];
  const auto f = nodes_[n.parent].seq;
  int k = static_cast<int>(f.size());
  const RMap& rm = rmap(n.c);

  std::vector<Outcome> ordered;
  int cursor = -1;
  UType last_type = UType::TypeI;
  auto insert_at = [&](Outcome o) {
    int pos;
    if (cursor < 0)
      pos = 0;
    else if (last_type == UType::TypeI)
      pos = cursor;  // just to the left
    else
      pos = cursor + 1;  // just to the right
    ordered.insert(ordered.begin() + pos, std::move(o));
    cursor = pos;
  };

  for (int i = k - 1; i >= 0; --i) {
    auto [a, xi] = f[i];
    int rxi = rm(xi);
    Outcome o;
    o.kind = OutcomeKind::U;
    o.level = i;
    if (rxi > xi) {
      o.utype = UType::TypeI;
      o.child_seq = f;
      o.child_seq[i] = {a, rxi};
      for (int j = i + 1; j < k; ++j) o.child_seq[j] = {0, iota_};
    } else {
      o.utype = UType::TypeII;
      if (a < m_ - 1) {
        o.child_seq = f;
        o.child_seq[i] = {a + 1, iota_};
        for (int j = i + 1; j < k; ++j) o.child_seq[j] = {0, iota_};
      } else {
        o.base_red = true;
        o.terminal = true;
      }
    }
    UType t = o.utype;
    insert_at(std::move(o));
    last_type = t;
  }
  {
    Outcome o;
    o.kind = OutcomeKind::Ctr;
    o.terminal = true;
    insert_at(std::move(o));
  }
  for (OutcomeKind wk : {OutcomeKind::W, OutcomeKind::D}) {
    Outcome o;
    o.kind = wk;
    o.child_seq = f;
    if (k < u_sets_) o.child_seq.emplace_back(0, iota_);
    ordered.push_back(std::move(o));
  }
  n.outcomes = std::move(ordered);
}

int PriorityTree::materialize_child(int id, int oi) const {
  StrategyNode& n = nodes_[id];
  Outcome& o = n.outcomes[oi];
  if (o.child >= 0 || o.terminal || o.truncated) return o.child;
  if (static_cast<int>(nodes_.size()) >= budget_) {
    o.truncated = true;
    truncated_ = true;
    return -1;
  }
  StrategyNode ch;
  ch.id = static_cast<int>(nodes_.size());
  ch.parent = id;
  ch.parent_outcome = oi;
  ch.depth = n.depth + 1;
  ch.path = n.path;
  ch.path.push_back(oi);
  if (n.is_s) {
    int e = assign_index(id);
    ch.is_s = false;
    ch.rlist_index = e;
    ch.c = requirement(e).c;
    ch.psi = requirement(e).psi;
    nodes_.push_back(std::move(ch));
    build_outcomes(ch.id);
  } else {
    ch.is_s = true;
    ch.seq = o.child_seq;
    ch.outcomes.push_back(
        {OutcomeKind::S0, -1, UType::TypeI, false, -1, false, false, {}});
    if (omega_)
      ch.outcomes.push_back(
          {OutcomeKind::Invalid, -1, UType::TypeI, false, -1, true, false, {}});
    nodes_.push_back(std::move(ch));
  }
  nodes_[id].outcomes[oi].child = nodes_.back().id;
  return nodes_.back().id;
}

void PriorityTree::materialize_bfs() const {
  std::deque<int> work{0};
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    const StrategyNode& n = nodes_[id];
    for (std::size_t oi = 0; oi < n.outcomes.size(); ++oi) {
      int ch = materialize_child(id, static_cast<int>(oi));
      if (ch >= 0 && ch == static_cast<int>(nodes_.size()) - 1) work.push_back(ch);
    }
  }
}

const RReq& PriorityTree::requirement(int e) const {
  int nji = static_cast<int>(ji_order_.size());
  while (static_cast<int>(r_list_.size()) <= e) {
    // default list: cycle the join-irreducibles in T_L order; every entry
    // carries its own scripted functional
    int k = static_cast<int>(r_list_.size());
    r_list_.push_back({ji_order_[k % nji], k});
  }
  return r_list_[e];
}

const RMap& PriorityTree::rmap(Elem c) const {
  for (std::size_t i = 0; i < ji_order_.size(); ++i)
    if (ji_order_[i] == c) return rmaps_[i];
  throw Error(ErrorKind::NotJoinIrreducible, "no R-map for element");
}

int PriorityTree::assign_index(int parent_s) const {
  std::set<int> used;
  for (int a = parent_s; a != -1; a = nodes_[a].parent)
    if (!nodes_[a].is_s) used.insert(nodes_[a].rlist_index);
  int e = 0;
  while (used.count(e)) ++e;
  requirement(e);  // materialize
  return e;
}

int PriorityTree::levels(int rnode) const {
  return static_cast<int>(nodes_[nodes_[rnode].parent].seq.size());
}

int PriorityTree::outcome_index(int rnode, OutcomeKind k, int level) const {
  const auto& outs = nodes_[rnode].outcomes;
  for (std::size_t i = 0; i < outs.size(); ++i)
    if (outs[i].kind == k && (k != OutcomeKind::U || outs[i].level == level))
      return static_cast<int>(i);
  throw Error(ErrorKind::BadInput, "no such outcome");
}

int PriorityTree::child_via(int node, OutcomeKind k, int level) const {
  return materialize_child(node, outcome_index(node, k, level));
}

std::vector<FuncInstance> PriorityTree::family_instances(int level, int copy,
                                                         int leaf) const {
  std::vector<FuncInstance> out;
  for (auto& f : family_at(*itree_, leaf)) out.push_back({level, copy, f});
  return out;
}

std::vector<FuncInstance> PriorityTree::mt_s(int snode) const {
  const StrategyNode& b = nodes_[snode];
  if (!b.is_s) throw Error(ErrorKind::BadInput, "mt_s wants an S-node");
  int k = static_cast<int>(b.seq.size());
  if (b.parent == -1) return family_instances(0, 0, iota_);
  int app = nodes_[b.parent].parent;  // S-node above the parent R-node
  const auto& g = nodes_[app].seq;
  std::vector<FuncInstance> out;
  int i;
  if (static_cast<int>(g.size()) == k - 1) {
    return family_instances(k - 1, 0, iota_);
  }
  for (i = 0; i < k; ++i)
    if (g[i] != b.seq[i]) break;
  if (i < k) {
    auto [a, eta] = g[i];
    auto [bb, xi] = b.seq[i];
    if (a == bb && eta < xi) {
      // sigma0 below eta, sigma1 0...0 = xi: the new Gammas along xi
      const auto& leaves = itree_->leaves();
      const std::string& etas = leaves[eta];
      const std::string& xis = leaves[xi];
      std::size_t p = 0;
      while (p < etas.size() && p < xis.size() && etas[p] == xis[p]) ++p;
      for (std::size_t len = p + 1; len < xis.size(); ++len) {
        FunctionalSpec fs;
        fs.kind = FunctionalSpec::Gamma;
        fs.site = xis.substr(0, len);
        fs.target_c = itree_->c_label(fs.site);
        out.push_back({i, bb, fs});
      }
    } else if (a + 1 == bb) {
      auto fam = family_instances(i, bb, xi);
      out.insert(out.end(), fam.begin(), fam.end());
    }
    // a == bb && eta == xi: nothing at this coordinate
  }
  for (int j = (i < k ? i + 1 : k); j < k; ++j) {
    auto fam = family_instances(j, b.seq[j].first, b.seq[j].second);
    out.insert(out.end(), fam.begin(), fam.end());
  }
  return out;
}

std::vector<FuncInstance> PriorityTree::mt_s_below(int snode, int i) const {
  std::vector<FuncInstance> out;
  for (auto& fi : mt_s(snode))
    if (fi.level < i) out.push_back(fi);
  return out;
}

std::vector<FuncInstance> PriorityTree::kl_r(int rnode, int i) const {
  const StrategyNode& b = nodes_[rnode];
  if (b.is_s) throw Error(ErrorKind::BadInput, "kl_r wants an R-node");
  const auto& f = nodes_[b.parent].seq;
  int k = static_cast<int>(f.size());
  std::vector<FuncInstance> out;
  int oi = outcome_index(rnode, OutcomeKind::U, i);
  const Outcome& o = b.outcomes[oi];
  auto [a, eta] = f[i];
  if (!o.terminal) {
    int bb = o.child_seq[i].first;
    int xi = o.child_seq[i].second;
    auto fam_eta = family_instances(i, a, eta);
    if (a == bb) {
      auto fam_xi = family_at(*itree_, xi);
      for (auto& fi : fam_eta) {
        bool in_xi = false;
        for (auto& g : fam_xi)
          if (g == fi.spec) in_xi = true;
        if (!in_xi) out.push_back(fi);
      }
    } else {
      out.insert(out.end(), fam_eta.begin(), fam_eta.end());
    }
  }
  for (int j = i + 1; j < k; ++j) {
    auto fam = family_instances(j, f[j].first, f[j].second);
    out.insert(out.end(), fam.begin(), fam.end());
  }
  return out;
}

std::optional<FuncInstance> PriorityTree::mt_r(int rnode, int i) const {
  const StrategyNode& b = nodes_[rnode];
  const auto& f = nodes_[b.parent].seq;
  int oi = outcome_index(rnode, OutcomeKind::U, i);
  const Outcome& o = b.outcomes[oi];
  if (o.terminal || o.utype != UType::TypeI) return std::nullopt;
  auto [a, eta] = f[i];
  int xi = rmap(b.c)(eta);
  auto fam_eta = family_at(*itree_, eta);
  auto fam_xi = family_at(*itree_, xi);
  std::optional<FuncInstance> res;
  for (auto& g : fam_xi) {
    bool in_eta = false;
    for (auto& h : fam_eta)
      if (h == g) in_eta = true;
    if (in_eta) continue;
    if (res)
      throw Error(ErrorKind::InvariantViolation, "mt Delta not unique");
    res = FuncInstance{i, a, g};
  }
  if (res && res->spec.kind != FunctionalSpec::Delta)
    throw Error(ErrorKind::InvariantViolation, "mt member must be a Delta");
  return res;
}

FunctionalSpec PriorityTree::star_delta(int beta, int i) const {
  const StrategyNode& b = nodes_[beta];
  const auto& f = nodes_[b.parent].seq;
  int eta = f[i].second;
  auto fam = family_at(*itree_, eta);
  for (auto& g : fam) {
    if (g.kind != FunctionalSpec::Delta) continue;
    if (has_conflict(*itree_, b.c, g)) return g;  // highest first
  }
  throw Error(ErrorKind::InvariantViolation,
              "Type II outcome without a conflicting Delta");
}

int PriorityTree::beta_star(int beta, int i) const {
  const StrategyNode& b = nodes_[beta];
  int oi = outcome_index(beta, OutcomeKind::U, i);
  if (b.outcomes[oi].utype != UType::TypeII)
    throw Error(ErrorKind::BadInput, "beta_star needs a Type II U-outcome");
  FunctionalSpec target = star_delta(beta, i);
  int copy = nodes_[b.parent].seq[i].first;
  for (int a = b.parent; a != -1; a = nodes_[a].parent) {
    const StrategyNode& n = nodes_[a];
    if (n.is_s || n.parent == -1) continue;
    // was this ancestor's U_i edge taken on the path to beta?
    int child_on_path = -1;
    for (int x = beta; x != -1; x = nodes_[x].parent)
      if (nodes_[x].parent == a) child_on_path = nodes_[x].parent_outcome;
    if (child_on_path < 0) continue;
    const Outcome& o = n.outcomes[child_on_path];
    if (o.kind != OutcomeKind::U || o.level != i) continue;
    auto mt = mt_r(a, i);
    if (mt && mt->spec == target && mt->copy == copy) {
      // the two properties used throughout
      const Lattice& l = lattice();
      if (!l.leq(n.c, b.c))
        throw Error(ErrorKind::InvariantViolation, "beta_star: c_sigma > c");
      for (Elem d : r_oracle(l, n.c))
        if (d == b.c)
          throw Error(ErrorKind::InvariantViolation,
                      "beta_star: C appears in the oracle of R_{c_sigma}");
      return a;
    }
  }
  throw Error(ErrorKind::InvariantViolation, "beta_star: builder not found");
}

int PriorityTree::beta_sharp(int beta, int i) const {
  const StrategyNode& b = nodes_[beta];
  int a_i = nodes_[b.parent].seq[i].first;
  if (a_i == 0) return -1;
  for (int a = b.parent; a != -1; a = nodes_[a].parent) {
    const StrategyNode& n = nodes_[a];
    if (n.is_s) continue;
    int child_on_path = -1;
    for (int x = beta; x != -1; x = nodes_[x].parent)
      if (nodes_[x].parent == a) child_on_path = nodes_[x].parent_outcome;
    if (child_on_path < 0) continue;
    const Outcome& o = n.outcomes[child_on_path];
    if (o.kind != OutcomeKind::U || o.level != i) continue;
    if (o.utype != UType::TypeII || o.terminal) continue;
    if (o.child_seq[i].first == a_i && o.child_seq[i].second == iota_) return a;
  }
  return -1;
}

int PriorityTree::env_lt(int beta, int i) const {
  if (i <= 0) return 0;
  const auto& want = nodes_[nodes_[beta].parent].seq;
  std::vector<int> s_ancestors;
  for (int a = nodes_[beta].parent; a != -1; a = nodes_[a].parent)
    if (nodes_[a].is_s) s_ancestors.push_back(a);
  std::reverse(s_ancestors.begin(), s_ancestors.end());
  for (int a : s_ancestors) {
    const auto& sq = nodes_[a].seq;
    if (static_cast<int>(sq.size()) < i) continue;
    bool ok = true;
    for (int j = 0; j < i; ++j)
      if (sq[j] != want[j]) ok = false;
    if (ok) return a;
  }
  throw Error(ErrorKind::InvariantViolation, "env_lt: no S-node matches");
}

int PriorityTree::priority_cmp(int a, int b) const {
  if (a == b) return 0;
  const auto& pa = nodes_[a].path;
  const auto& pb = nodes_[b].path;
  std::size_t i = 0;
  while (i < pa.size() && i < pb.size() && pa[i] == pb[i]) ++i;
  if (i == pa.size()) return -1;  // a is an initial segment
  if (i == pb.size()) return 1;
  return pa[i] < pb[i] ? -1 : 1;
}

int PriorityTree::priority_cmp_edges(int node_a, int oa, int node_b, int ob) const {
  auto pa = nodes_[node_a].path;
  pa.push_back(oa);
  auto pb = nodes_[node_b].path;
  pb.push_back(ob);
  if (pa == pb) return 0;
  std::size_t i = 0;
  while (i < pa.size() && i < pb.size() && pa[i] == pb[i]) ++i;
  if (i == pa.size()) return -1;
  if (i == pb.size()) return 1;
  return pa[i] < pb[i] ? -1 : 1;
}

bool PriorityTree::left_of_node(int node_a, int oa, int b) const {
  auto pa = nodes_[node_a].path;
  pa.push_back(oa);
  const auto& pb = nodes_[b].path;
  std::size_t i = 0;
  while (i < pa.size() && i < pb.size() && pa[i] == pb[i]) ++i;
  if (i == pa.size()) return false;  // b under or equal
  if (i == pb.size()) return false;  // edge below b
  return pa[i] < pb[i];
}

std::string PriorityTree::seq_string(int id) const {
  const auto& sq = nodes_[id].seq;
  std::string s;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(sq[i].first) + std::to_string(sq[i].second);
  }
  return s;
}

std::string PriorityTree::path_string(int id) const {
  const StrategyNode& n = nodes_[id];
  if (n.parent == -1) return "root";
  std::string s = path_string(n.parent);
  const Outcome& o = nodes_[n.parent].outcomes[n.parent_outcome];
  switch (o.kind) {
    case OutcomeKind::U: s += ".U" + std::to_string(o.level); break;
    case OutcomeKind::Ctr: s += ".ctr"; break;
    case OutcomeKind::W: s += ".w"; break;
    case OutcomeKind::D: s += ".d"; break;
    case OutcomeKind::S0: s += ".0"; break;
    case OutcomeKind::Invalid: s += ".inv"; break;
  }
  return s;
}

std::string PriorityTree::to_dot() const {
  std::ostringstream os;
  os << "digraph priority_tree {\n  node [fontname=\"monospace\"];\n";
  for (const auto& n : nodes_) {
    if (n.is_s) {
      os << "  n" << n.id << " [shape=box,label=\"" << seq_string(n.id) << "\"];\n";
    } else {
      os << "  n" << n.id << " [shape=ellipse,label=\"R^" << n.rlist_index << " c_"
         << itree_->c_name(n.c) << " psi" << n.psi << "\"];\n";
    }
    for (std::size_t oi = 0; oi < n.outcomes.size(); ++oi) {
      const Outcome& o = n.outcomes[oi];
      std::string label;
      switch (o.kind) {
        case OutcomeKind::U:
          label = "U" + std::to_string(o.level);
          if (o.utype == UType::TypeII) label += o.base_red ? " RED" : " II";
          break;
        case OutcomeKind::Ctr: label = "ctr"; break;
        case OutcomeKind::W: label = "w"; break;
        case OutcomeKind::D: label = "d"; break;
        case OutcomeKind::S0: label = "0"; break;
        case OutcomeKind::Invalid: label = "inv"; break;
      }
      std::string style = o.base_red ? ",style=bold" : "";
      if (o.child >= 0) {
        os << "  n" << n.id << " -> n" << o.child << " [label=\"" << label << "\""
           << style << "];\n";
      } else {
        std::string extra = o.truncated ? "trunc" : "term";
        os << "  t" << n.id << "_" << oi << " [shape=point];\n";
        os << "  n" << n.id << " -> t" << n.id << "_" << oi << " [label=\"" << label
           << " " << extra << "\"" << style << "];\n";
      }
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace latpri
