// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "datascout/core/rng.hpp"
#include "datascout/layout.hpp"
#include "datascout/modelgw.hpp"
#include "datascout/ragindex.hpp"
#include "support.hpp"

using namespace datascout;
using namespace datascout::layout;

namespace {

ragindex::IndexEntry entry(const std::string& id, std::vector<double> v) {
  ragindex::IndexEntry e;
  e.entry_id = id;
  modelgw::normalize_in_place(v);
  e.vector = std::move(v);
  return e;
}

/// Unit vector at `angle` radians from the x axis; cosine between two such
/// vectors is cos of the angle between them.
std::vector<double> at_angle(double angle) { return {std::cos(angle), std::sin(angle)}; }

double dist(const GraphLayout& l, const std::string& a, const std::string& b) {
  const auto& p = l.positions.at(a);
  const auto& q = l.positions.at(b);
  return std::hypot(p.x - q.x, p.y - q.y);
}

SimilarityGraph two_pair_graph() {
  SimilarityGraph g;
  for (const char* id : {"a", "b", "c", "d"}) g.nodes.push_back({id, NodeKind::kRecord});
  g.edges = {{"a", "b", 0.95}, {"c", "d", 0.55}, {"b", "c", 0.5}};
  return g;
}

}  // namespace

TEST_CASE("Layout: similar entries are linked with their cosine", "[unit][layout]") {
  ragindex::VectorIndex index(2);
  index.add(entry("a", at_angle(0.0)));
  index.add(entry("b", at_angle(std::acos(0.9))));
  const auto g = build_graph(index);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].weight == Catch::Approx(0.9).margin(1e-6));
}

TEST_CASE("Layout: dissimilar entries stay unlinked", "[unit][layout]") {
  ragindex::VectorIndex index(2);
  index.add(entry("a", at_angle(0.0)));
  index.add(entry("b", at_angle(std::acos(0.1))));
  const auto g = build_graph(index);
  CHECK(g.nodes.size() == 2);
  CHECK(g.edges.empty());
  CHECK_ERROR_CODE(build_graph(ragindex::VectorIndex(2)), ErrorCode::kEmptyIndex);
}

TEST_CASE("Layout: the query node links to its own entry with weight one", "[unit][layout]") {
  ragindex::VectorIndex index(2);
  index.add(entry("a", at_angle(0.0)));
  index.add(entry("b", at_angle(1.0)));
  const auto g = build_graph(index, index.find("a")->vector);
  const auto* q = g.find("query");
  REQUIRE(q != nullptr);
  CHECK(q->kind == NodeKind::kQuery);
  bool found = false;
  for (const auto& e : g.edges) {
    if (e.a == "query" && e.b == "a") {
      found = true;
      CHECK(e.weight == Catch::Approx(1.0).margin(1e-6));
    }
  }
  CHECK(found);
}

TEST_CASE("Layout: graphs satisfy the edge invariants", "[property][layout]") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    ragindex::VectorIndex index(4);
    const std::size_t n = 3 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
      index.add(entry("e" + std::to_string(i), {rng.uniform(0.1, 1), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)}));
    }
    GraphOptions opts;
    opts.max_degree = 1 + rng.below(5);
    const auto g = build_graph(index, std::vector<double>{0.5, 0.5, 0.5, 0.5}, opts);
    std::set<std::pair<std::string, std::string>> pairs;
    std::map<std::string, std::size_t> degree;
    for (const auto& e : g.edges) {
      CHECK(e.a != e.b);
      CHECK(e.weight > 0.0);
      CHECK(e.weight <= 1.0);
      CHECK(pairs.insert(std::minmax(e.a, e.b)).second);
      if (e.a != "query" && e.b != "query") {
        CHECK(e.weight >= opts.edge_threshold);
        ++degree[e.a];
        ++degree[e.b];
      }
    }
    for (const auto& [id, d] : degree) CHECK(d <= opts.max_degree);
  }
}

TEST_CASE("Layout: node cap keeps the records nearest the query", "[unit][layout]") {
  ragindex::VectorIndex index(2);
  for (int i = 0; i < 10; ++i) index.add(entry("n" + std::to_string(i), at_angle(0.1 * i)));
  GraphOptions opts;
  opts.max_nodes = 4;
  const auto g = build_graph(index, at_angle(0.0), opts);
  CHECK(g.nodes.size() == 4);
  CHECK(g.find("n0") != nullptr);
  CHECK(g.find("n2") != nullptr);
  CHECK(g.find("n3") == nullptr);
}

TEST_CASE("Layout: a single node sits at the centre", "[unit][layout]") {
  SimilarityGraph g;
  g.nodes.push_back({"only", NodeKind::kRecord});
  const auto l = fr_layout(g);
  CHECK(l.positions.at("only").x == 0.5);
  CHECK(l.positions.at("only").y == 0.5);
}

TEST_CASE("Layout: two linked nodes settle near the natural spring length", "[unit][layout]") {
  SimilarityGraph g;
  g.nodes = {{"a", NodeKind::kRecord}, {"b", NodeKind::kRecord}};
  g.edges = {{"a", "b", 1.0}};
  const double k = std::sqrt(1.0 / 2.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto l = fr_layout(g, 300, seed);
    const auto& p = l.raw_positions.at("a");
    const auto& q = l.raw_positions.at("b");
    const double d = std::hypot(p.x - q.x, p.y - q.y);
    CHECK(d >= 0.5 * k);
    CHECK(d <= 2.0 * k);
  }
}

TEST_CASE("Layout: tight pairs end closer than loose pairs", "[property][layout]") {
  const auto g = two_pair_graph();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto l = fr_layout(g, 300, seed);
    CHECK(dist(l, "a", "b") < dist(l, "c", "d"));
  }
}

TEST_CASE("Layout: fixed seeds are deterministic and positions stay in the unit square", "[property][layout]") {
  const auto g = two_pair_graph();
  const auto a = fr_layout(g, 300, 7);
  const auto b = fr_layout(g, 300, 7);
  for (const auto& [id, p] : a.positions) {
    CHECK(p.x == b.positions.at(id).x);
    CHECK(p.y == b.positions.at(id).y);
    CHECK(p.x >= 0.0);
    CHECK(p.x <= 1.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y <= 1.0);
  }
  CHECK(a.iterations_run == 300);
  CHECK(a.seed == 7);
}

TEST_CASE("Layout: input order does not change the layout", "[property][layout]") {
  auto g = two_pair_graph();
  const auto base = fr_layout(g, 200, 3);
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    rng.shuffle(g.nodes);
    rng.shuffle(g.edges);
    for (auto& e : g.edges) {
      if (rng.uniform() < 0.5) std::swap(e.a, e.b);
    }
    const auto l = fr_layout(g, 200, 3);
    for (const auto& [id, p] : base.positions) {
      CHECK(l.positions.at(id).x == p.x);
      CHECK(l.positions.at(id).y == p.y);
    }
  }
}

TEST_CASE("Layout: invalid graphs are rejected", "[unit][layout]") {
  SimilarityGraph empty;
  CHECK_ERROR_CODE(fr_layout(empty), ErrorCode::kPrecondition);
  SimilarityGraph self;
  self.nodes = {{"a", NodeKind::kRecord}};
  self.edges = {{"a", "a", 1.0}};
  CHECK_ERROR_CODE(fr_layout(self), ErrorCode::kInvalidArgument);
  SimilarityGraph dangling;
  dangling.nodes = {{"a", NodeKind::kRecord}};
  dangling.edges = {{"a", "zz", 1.0}};
  CHECK_ERROR_CODE(fr_layout(dangling), ErrorCode::kInvalidArgument);
}

TEST_CASE("Layout: JSON and SVG exports carry every node and edge", "[unit][layout]") {
  auto g = two_pair_graph();
  g.nodes.push_back({"query", NodeKind::kQuery});
  g.edges.push_back({"query", "a", 0.8});
  const auto l = fr_layout(g);
  const auto j = layout_json(g, l);
  CHECK(j["nodes"].size() == 5);
  CHECK(j["edges"].size() == 4);
  CHECK(j["nodes"][4]["kind"] == "query");
  CHECK(j["edges"][0]["w"].get<double>() == 0.95);
  const auto svg = render_svg(g, l);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 8);
  std::size_t circles = 0;
  for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
  CHECK(circles == 5);
  CHECK(xml_escape("a<b&\"c\"") == "a&lt;b&amp;&quot;c&quot;");
}
