#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rrw/exact.hpp"
#include "rrw/graphlet.hpp"

namespace {

using rrw::Coupling;
using rrw::Graph;

TEST(Triples, Classification) {
  const Graph g = rrw::load_edge_list_text("0 1\n1 2\n2 0\n2 3\n");
  EXPECT_EQ(rrw::classify_3_state(g, 0, 1, 2), rrw::TripleKind::triangle);
  EXPECT_EQ(rrw::classify_3_state(g, 1, 2, 3), rrw::TripleKind::wedge);
  EXPECT_EQ(rrw::classify_3_state(g, 3, 2, 3), rrw::TripleKind::discard);
  EXPECT_THROW(rrw::classify_3_state(g, 0, 3, 2), std::invalid_argument);
}

TEST(Tally, WeightsByMiddleDegree) {
  const Graph g = rrw::load_edge_list_text("0 1\n1 2\n2 0\n2 3\n");
  rrw::GraphletTally t;
  t.add(g, {{0, 1, 2, 3, 2}, false});
  // (0,1,2) triangle d=2; (1,2,3) wedge d=3; (2,3,2) discard.
  EXPECT_DOUBLE_EQ(t.c_tri, 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(t.c_wed, 3.0 / 2.0);
  EXPECT_EQ(t.discarded, 1u);
  EXPECT_EQ(t.states_seen, 3u);
  EXPECT_DOUBLE_EQ(t.concentration(), (1.0 / 3.0) / (1.0 / 3.0 + 1.5));
}

TEST(Graphlet, TriangleGraphIsAlwaysOne) {
  const Graph k3 = rrw::complete_graph(3);
  for (Coupling c : {Coupling::iid, Coupling::repelling})
    for (const auto& s : rrw::estimate_triangle_concentration(k3, 10, 4, c, 50, 3)) {
      ASSERT_TRUE(s.valid);
      EXPECT_EQ(s.c_tri_hat, 1.0);
    }
}

TEST(Graphlet, TriangleFreeGraphIsZero) {
  for (const auto& s : rrw::estimate_triangle_concentration(rrw::cycle_graph(6), 8, 3,
                                                            Coupling::repelling, 20, 1))
    EXPECT_EQ(s.c_tri_hat, 0.0);
}

TEST(Graphlet, LongWalkConvergesOnK4MinusEdge) {
  // K4 minus an edge: 2 triangles, 2 wedges.
  const Graph g = rrw::load_edge_list_text("0 1\n0 2\n0 3\n1 2\n1 3\n");
  const double exact = rrw::exact_graphlet_concentration(g).c_tri;
  EXPECT_DOUBLE_EQ(exact, 0.5);
  const auto s = rrw::graphlet_trial(g, 100000, Coupling::iid, 1, 8, 0);
  EXPECT_NEAR(s.c_tri_hat, exact, 0.01 * exact);
}

TEST(Graphlet, SingleWalkerSameUnderBothSchemes) {
  const Graph g = rrw::gen_erdos_renyi(20, 0.25, 2);
  for (std::uint64_t t = 0; t < 30; ++t) {
    const auto a = rrw::graphlet_trial(g, 16, Coupling::iid, 1, 77, t);
    const auto b = rrw::graphlet_trial(g, 16, Coupling::repelling, 1, 77, t);
    EXPECT_EQ(a.start, b.start);
    EXPECT_EQ(a.tally.c_tri, b.tally.c_tri);
    EXPECT_EQ(a.tally.c_wed, b.tally.c_wed);
    EXPECT_EQ(a.tally.discarded, b.tally.discarded);
  }
}

TEST(Graphlet, InvalidTrialsOnStar) {
  // On a single edge every triple backtracks.
  const auto samples = rrw::estimate_triangle_concentration(rrw::star_graph(1), 5, 2,
                                                            Coupling::iid, 5, 0);
  for (const auto& s : samples) {
    EXPECT_FALSE(s.valid);
    EXPECT_EQ(s.c_tri_hat, 0.0);
  }
  EXPECT_THROW(rrw::graphlet_trial(rrw::complete_graph(3), 2, Coupling::iid, 1, 0, 0),
               std::invalid_argument);
}

}  // namespace
