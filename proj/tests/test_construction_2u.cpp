#include <doctest.h>

#include "latpri/construction.hpp"
#include "test_helpers.hpp"

using namespace latpri;
using namespace latpri::testing;

namespace {

// The two-U narrative branch: below the waiting k=1 node the tree grows
// U_1-blocks; X carries a RED U_1 over weak data, the Y-cascade below its
// Type I U_0 ends in the doubly-RED Y5.
struct TwoU {
  SimConfig cfg;
  Simulator s;
  int a, b, c, c1, c2, c3, c4, c5, x, y1, y2, y3, y4, y5, s1200;

  static SimConfig make() {
    SimConfig cfg;
    cfg.covers = {{0, 1}, {1, 2}};
    cfg.names = {"0", "a", "1"};
    cfg.m = 2;
    cfg.u_sets = 2;
    cfg.stages = 200;
    cfg.tree_budget = 4000;
    // lags stay small so computation lengths clear every threshold point
    // on this deep branch; only the orderings inside the later combines
    // need to be strict (C4 above X, Y4 above Y5)
    int lags[] = {1, 1, -1, 1, 1, 1, 2, -1, 3, 4, 4, 4, 5, 6};
    for (int psi = 0; psi <= 13; ++psi) {
      if (lags[psi] < 0)
        cfg.psi_tables[psi] = {-1, 0};  // C and C5 keep waiting
      else
        cfg.psi_tables[psi] = {2, 12, lags[psi]};
    }
    // Y5 converges late so its computation length clears every threshold
    // point assigned while the branch settled
    cfg.psi_tables[13].from = 70;
    cfg.psi_default = {2, 12, 8};
    return cfg;
  }

  TwoU() : cfg(make()), s(cfg) {
    const PriorityTree& t = s.tree();
    auto rchild = [&](int sn) { return t.child_via(sn, OutcomeKind::S0); };
    auto u = [&](int rn, int lvl) { return t.child_via(rn, OutcomeKind::U, lvl); };
    a = rchild(t.root());
    b = rchild(u(a, 0));
    c = rchild(u(b, 0));
    c1 = rchild(t.child_via(c, OutcomeKind::W));
    c2 = rchild(u(c1, 1));
    c3 = rchild(u(c2, 1));
    c4 = rchild(u(c3, 1));
    c5 = rchild(u(c4, 1));
    x = rchild(t.child_via(c5, OutcomeKind::W));
    s1200 = u(x, 0);
    y1 = rchild(s1200);
    y2 = rchild(u(y1, 1));
    y3 = rchild(u(y2, 1));
    y4 = rchild(u(y3, 1));
    y5 = rchild(u(y4, 1));
  }

  const Outcome& uout(int rn, int lvl) {
    const PriorityTree& t = s.tree();
    return t.node(rn).outcomes[t.outcome_index(rn, OutcomeKind::U, lvl)];
  }
};

}  // namespace

TEST_CASE("two-U structure: stars, sharps, environments") {
  TwoU w;
  const PriorityTree& t = w.s.tree();
  // X: RED U_1 over the weak pair (C4, X); Type I U_0 building the copy-1
  // Delta of the top family
  CHECK(w.uout(w.x, 1).base_red);
  CHECK(w.uout(w.x, 0).utype == UType::TypeI);
  CHECK(t.beta_star(w.x, 1) == w.c4);
  // Y5 is doubly RED; its U_0 star is X, its U_1 star is Y4
  CHECK(w.uout(w.y5, 1).base_red);
  CHECK(w.uout(w.y5, 0).base_red);
  CHECK(t.beta_star(w.y5, 0) == w.x);
  CHECK(t.beta_star(w.y5, 1) == w.y4);
  // Y3 has the GREEN U_1 whose copy bump feeds Y4, and a RED U_0
  CHECK(w.uout(w.y3, 1).utype == UType::TypeII);
  CHECK_FALSE(w.uout(w.y3, 1).base_red);
  CHECK(w.uout(w.y3, 0).base_red);
  CHECK(t.beta_sharp(w.y4, 1) == w.y3);
  CHECK(t.beta_sharp(w.y2, 1) == -1);  // a_1 = 0 below the Y2 coordinate
  // U_1 environments sit at the S-node whose first coordinate is (1, eta2)
  CHECK(t.env_lt(w.y2, 1) == w.s1200);
  CHECK(t.env_lt(w.y4, 1) == w.s1200);
  CHECK(t.node(w.s1200).seq ==
        std::vector<std::pair<int, int>>{{1, 2}, {0, 0}});
  CHECK(t.env_lt(w.y4, 0) == t.root());
}

TEST_CASE("two-U flows: data packages, truncation, strong link, travel") {
  TwoU w;
  Simulator& s = w.s;

  // ---- stage A: Y5 becomes a controller over the nested weak data ----
  while (s.step() && !s.controller_at(w.y5)) {
  }
  const Controller* cy5 = s.controller_at(w.y5);
  REQUIRE(cy5 != nullptr);
  int tau = cy5->s_ctr;

  // E^0(Y5) = E^1(X) (x)_s E^1(Y5) with four nodes
  const DataPkg* d0 = cy5->data.get();
  CHECK(d0->level == 0);
  CHECK(d0->g == 0);
  CHECK(d0->ref_stage == tau);
  REQUIRE(d0->left);
  REQUIRE(d0->right);
  CHECK(d0->left->node == w.x);
  CHECK(d0->left->left->node == w.c4);
  CHECK(d0->left->right->node == w.x);
  CHECK(d0->right->left->node == w.y4);
  CHECK(d0->right->right->node == w.y5);
  Point y_c4 = d0->left->left->y;
  Point y_x = d0->left->right->y;
  Point y_y4 = d0->right->left->y;
  Point y_y5 = d0->right->right->y;
  CHECK(y_c4 > y_x);
  CHECK(y_y4 > y_y5);

  // the controller modification truncates at the critical U_0 problem X,
  // dropping C4 from the decision candidates
  REQUIRE(cy5->frontier.size() == 3);
  const CtrEntry& ex = cy5->frontier[0];
  const CtrEntry& ey4 = cy5->frontier[1];
  const CtrEntry& ey5 = cy5->frontier[2];
  CHECK(ex.node == w.x);
  CHECK(ey4.node == w.y4);
  CHECK(ey5.node == w.y5);
  CHECK(ex.critical);
  CHECK(ex.level == 0);
  CHECK(ex.b == 1);
  CHECK(ex.y_adj == y_c4);  // adjusted to the deepest-left computation
  CHECK(ey4.critical);
  CHECK(ey4.level == 1);
  CHECK(ey4.b == 1);
  CHECK_FALSE(ey5.critical);
  // the five conditions: diff(U_0) for X; same(U_0), diff(U_1) for Y4;
  // same(U_0), same(U_1) for Y5
  REQUIRE(ex.conds.size() == 1);
  CHECK(ex.conds[0].level == 0);
  CHECK_FALSE(ex.conds[0].same_type);
  CHECK(ex.conds[0].ref_len == y_y4);
  REQUIRE(ey4.conds.size() == 2);
  CHECK(ey4.conds[0].level == 0);
  CHECK(ey4.conds[0].same_type);
  CHECK(ey4.conds[0].ref_len == y_y4);
  CHECK(ey4.conds[1].level == 1);
  CHECK_FALSE(ey4.conds[1].same_type);
  CHECK(ey4.conds[1].ref_len == y_y5);
  REQUIRE(ey5.conds.size() == 2);
  CHECK(ey5.conds[0].same_type);
  CHECK(ey5.conds[0].ref_len == y_y5);
  CHECK(ey5.conds[1].same_type);
  CHECK(ey5.conds[1].ref_len == y_y5);
  // initial decision: Y5 itself, d active, witness into C_0
  CHECK(cy5->frontier[cy5->decision].node == w.y5);
  CHECK(s.d_active(w.y5));
  int c0set = s.set_c(s.itree().c_label("0"));
  CHECK(s.set_history(c0set).value(d0->right->right->witness) == 1);

  // ---- stage B: U_1 change flips the decision to Y4, toggling Y3 ----
  // leave quiet stages first so the later Y3 data outgrows tau
  s.add_u_event(1, {y_y5, tau + 17, 1});
  for (int i = 0; i < 25 && !s.red_overlay(w.y3, 1); ++i) REQUIRE(s.step());
  REQUIRE(s.red_overlay(w.y3, 1));
  cy5 = s.controller_at(w.y5);
  REQUIRE(cy5 != nullptr);
  CHECK(cy5->frontier[cy5->decision].node == w.y4);
  CHECK_FALSE(s.d_active(w.y5));

  // ---- stage C: Y3 forms its own controller over the toggled U_1 ----
  for (int i = 0; i < 30 && !s.controller_at(w.y3); ++i) REQUIRE(s.step());
  const Controller* cy3 = s.controller_at(w.y3);
  REQUIRE(cy3 != nullptr);
  REQUIRE(cy3->frontier.size() == 3);
  CHECK(cy3->frontier[0].node == w.x);
  CHECK(cy3->frontier[1].node == w.y2);
  CHECK(cy3->frontier[2].node == w.y3);
  CHECK(cy3->frontier[1].critical);
  CHECK(cy3->frontier[1].level == 1);
  CHECK(cy3->frontier[1].b == 0);  // the critical U_1^0 problem

  // ---- stage D: a change above tau flips Y3's decision to Y2; the
  // pigeonhole pair (Y2, Y4) yields strong U_1 data and a link ----
  Point pprime = cy3->frontier[1].conds[1].ref_len;
  REQUIRE(pprime > tau);  // invisible to the Y5 controller
  s.add_u_event(1, {pprime, s.stage() + 1, 1});
  int link_id = -1;
  for (int i = 0; i < 4 && link_id < 0; ++i) {
    REQUIRE(s.step());
    for (const auto& lk : s.links())
      if (lk.alive && lk.target == w.y4) link_id = lk.id;
  }
  REQUIRE(link_id >= 0);
  const Link& lk = s.links()[link_id];
  CHECK(lk.level == 1);
  CHECK(lk.start_snode == w.s1200);
  CHECK(lk.target_kind == OutcomeKind::U);
  CHECK(lk.target_level == 0);
  CHECK(lk.pkg->g == 1);  // strong
  CHECK(lk.pkg->left->node == w.y2);
  CHECK(lk.pkg->right->node == w.y4);
  cy3 = s.controller_at(w.y3);
  REQUIRE(cy3 != nullptr);
  CHECK(cy3->frontier[cy3->decision].node == w.y2);
  cy5 = s.controller_at(w.y5);
  REQUIRE(cy5 != nullptr);
  CHECK(cy5->frontier[cy5->decision].node == w.y4);

  // ---- stage E: the link travels; Y4 becomes a problem-free controller
  // over all-c_lam data and the two old controllers are initialized ----
  for (int i = 0; i < 6 && !s.controller_at(w.y4); ++i) REQUIRE(s.step());
  const Controller* cy4 = s.controller_at(w.y4);
  REQUIRE(cy4 != nullptr);
  CHECK(s.controller_at(w.y5) == nullptr);
  CHECK(s.controller_at(w.y3) == nullptr);
  REQUIRE(cy4->frontier.size() == 4);  // S^ctr = S^0, nothing truncated
  CHECK(cy4->frontier[0].node == w.c4);
  CHECK(cy4->frontier[1].node == w.x);
  CHECK(cy4->frontier[2].node == w.y2);
  CHECK(cy4->frontier[3].node == w.y4);
  for (const auto& e : cy4->frontier) CHECK_FALSE(e.critical);
  // all four witnesses entered C_lam
  int clam = s.set_c(s.itree().c_label(""));
  for (const auto& e : cy4->frontier) {
    REQUIRE(e.pkg->leaf());
    CHECK(s.set_history(clam).value(e.pkg->witness) == 1);
  }
  CHECK(s.summary().invariant_ok);
}
