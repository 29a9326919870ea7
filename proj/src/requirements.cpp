#include "latpri/requirements.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace latpri {

IntervalTree::IntervalTree(const Lattice& l) : l_(&l) {
  if (!l.distributive())
    throw Error(ErrorKind::NotDistributive,
                "interval tree requires a distributive lattice");
  std::deque<std::string> work{""};
  nodes_[""] = {l.zero(), l.one()};
  while (!work.empty()) {
    std::string sigma = work.front();
    work.pop_front();
    Interval iv = nodes_[sigma];
    if (iv.p == iv.q) {
      leaves_.push_back(sigma);
      continue;
    }
    internal_.push_back(sigma);
    // p_{sigma 0}: lowest-index cover of p_sigma inside [p_sigma, q_sigma]
    auto cands = l.covers_above_in(iv.p, iv.q);
    Elem p0 = cands.front();
    Elem q1 = l.meet(l.rel_pseudocomplement(p0, iv.p), iv.q);
    nodes_[sigma + "0"] = {p0, iv.q};
    nodes_[sigma + "1"] = {iv.p, q1};
    // c_sigma: the unique join-irreducible in spec(p0) \ spec(p_sigma)
    auto s0 = l.spec(p0);
    auto sp = l.spec(iv.p);
    Elem c = -1;
    for (Elem x : s0)
      if (std::find(sp.begin(), sp.end(), x) == sp.end()) {
        if (c != -1)
          throw Error(ErrorKind::InvariantViolation, "c_sigma not unique");
        c = x;
      }
    if (c == -1) throw Error(ErrorKind::InvariantViolation, "c_sigma missing");
    c_label_[sigma] = c;
    work.push_back(sigma + "0");
    work.push_back(sigma + "1");
  }
  std::sort(leaves_.begin(), leaves_.end());  // lexicographic, 0 < 1
  for (const auto& sigma : internal_) {
    bool special = sigma.find('1') == std::string::npos;
    if (special) ji_site_[c_label_.at(sigma)] = sigma;
  }
}

const Interval& IntervalTree::interval(const std::string& sigma) const {
  auto it = nodes_.find(sigma);
  if (it == nodes_.end()) throw Error(ErrorKind::BadInput, "no such site");
  return it->second;
}

bool IntervalTree::is_leaf(const std::string& sigma) const {
  const auto& iv = interval(sigma);
  return iv.p == iv.q;
}

Elem IntervalTree::c_label(const std::string& sigma) const {
  auto it = c_label_.find(sigma);
  if (it == c_label_.end())
    throw Error(ErrorKind::BadInput, "site has no c-label");
  return it->second;
}

int IntervalTree::leaf_index(const std::string& eta) const {
  auto it = std::find(leaves_.begin(), leaves_.end(), eta);
  if (it == leaves_.end()) throw Error(ErrorKind::BadInput, "not a leaf");
  return static_cast<int>(it - leaves_.begin());
}

std::string IntervalTree::c_name(Elem c) const {
  auto it = ji_site_.find(c);
  if (it == ji_site_.end())
    throw Error(ErrorKind::NotJoinIrreducible, "element has no c-site");
  return it->second.empty() ? "lam" : it->second;
}

std::vector<FunctionalSpec> IntervalTree::functional_family(
    const std::string& sigma) const {
  if (!has(sigma)) throw Error(ErrorKind::BadInput, "no such site");
  std::vector<FunctionalSpec> out;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    std::string pre = sigma.substr(0, i);
    FunctionalSpec f;
    f.site = pre;
    if (sigma[i] == '0') {
      f.kind = FunctionalSpec::Gamma;
      f.target_c = c_label(pre);
    } else {
      f.kind = FunctionalSpec::Delta;
      Elem q1 = interval(pre + "1").q;
      f.oracle_c = l_->spec(q1);
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Elem> r_oracle(const Lattice& l, Elem c) {
  if (!l.is_ji(c))
    throw Error(ErrorKind::NotJoinIrreducible,
                l.name(c) + " is not join-irreducible");
  return l.spec(l.rel_pseudocomplement(c, l.ji_pred(c)));
}

bool has_conflict(const IntervalTree& t, Elem c, const FunctionalSpec& f) {
  const Lattice& l = t.lattice();
  if (!l.is_ji(c))
    throw Error(ErrorKind::NotJoinIrreducible, "conflict needs a join-irreducible");
  if (f.kind == FunctionalSpec::Gamma) return t.c_label(f.site) == c;
  Elem q1 = t.interval(f.site + "1").q;
  return l.leq(q1, l.rel_pseudocomplement(c, l.ji_pred(c)));
}

RMap r_map(const IntervalTree& t, Elem c) {
  RMap m;
  m.c = c;
  for (const auto& eta : t.leaves()) {
    auto fam = t.functional_family(eta);
    int target = -1;
    for (const auto& f : fam) {
      if (f.kind != FunctionalSpec::Gamma || !has_conflict(t, c, f)) continue;
      if (target != -1)
        throw Error(ErrorKind::InvariantViolation,
                    "conflicting Gamma not unique at leaf " + eta);
      std::string to = f.site + "1";
      while (!t.is_leaf(to)) to += "0";
      target = t.leaf_index(to);
    }
    m.table.push_back(target == -1 ? t.leaf_index(eta) : target);
  }
  return m;
}

namespace {

std::string oracle_str(const IntervalTree& t, const std::vector<Elem>& cs) {
  std::string s = "E";
  for (Elem c : cs) s += "+C_" + t.c_name(c);
  return s;
}

std::string family_name(const std::string& sigma) {
  return sigma.empty() ? "lam" : sigma;
}

std::string spec_str(const IntervalTree& t, const FunctionalSpec& f, int u_index) {
  std::string u = u_index < 0 ? "U" : "U_" + std::to_string(u_index);
  if (f.kind == FunctionalSpec::Gamma)
    return "C_" + t.c_name(f.target_c) + "=Gamma_" + family_name(f.site) +
           "^{E+" + u + "}";
  return u + "=Delta_" + family_name(f.site) + "^{" + oracle_str(t, f.oracle_c) +
         "}";
}

}  // namespace

RequirementReport requirement_report(const Lattice& l) {
  if (!l.distributive())
    throw Error(ErrorKind::NotDistributive, "report requires distributivity");
  IntervalTree t(l);
  std::ostringstream os;
  os << "lattice: " << l.size() << " elements, distributive: yes\n";
  os << "ji (in T_L order):";
  std::vector<Elem> ji_order;
  for (const auto& sigma : t.internal_sites()) {
    Elem c = t.c_label(sigma);
    if (t.ji_site().at(c) == sigma) ji_order.push_back(c);
  }
  for (Elem c : ji_order) os << " c_" << t.c_name(c) << "=" << l.name(c);
  os << "\n";
  os << "leaves:";
  for (std::size_t i = 0; i < t.leaves().size(); ++i)
    os << " eta_" << i << "=" << t.leaves()[i];
  os << "\n";
  os << "G: K = Theta^{" << oracle_str(t, ji_order) << "}\n";
  os << "S(U):";
  for (std::size_t i = 0; i < t.leaves().size(); ++i)
    os << (i ? " | " : " ") << "F_" << family_name(t.leaves()[i]) << "(U)";
  os << "\n";
  for (Elem c : ji_order) {
    os << "R_c_" << t.c_name(c) << "(Psi): C_" << t.c_name(c) << " != Psi^{"
       << oracle_str(t, r_oracle(l, c)) << "}\n";
  }
  for (const auto& eta : t.leaves()) {
    os << "F_" << family_name(eta) << "(U) = {";
    auto fam = t.functional_family(eta);
    for (std::size_t i = 0; i < fam.size(); ++i)
      os << (i ? ", " : " ") << spec_str(t, fam[i], -1);
    os << (fam.empty() ? "}" : " }") << "\n";
  }
  std::ostringstream csv;
  csv << "R";
  for (std::size_t i = 0; i < t.leaves().size(); ++i) csv << ",eta_" << i;
  csv << "\n";
  for (Elem c : ji_order) {
    os << "R-map R_c_" << t.c_name(c) << ":";
    csv << "R_c_" << t.c_name(c);
    RMap m = r_map(t, c);
    for (std::size_t i = 0; i < m.table.size(); ++i) {
      os << (i ? ", " : " ") << "eta_" << i << "->eta_" << m.table[i];
      csv << ",eta_" << m.table[i];
    }
    os << "\n";
    csv << "\n";
  }
  return {os.str(), csv.str()};
}

}  // namespace latpri
