// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 DataScout Contributors

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "datascout/core/error.hpp"
#include "datascout/core/rng.hpp"
#include "datascout/core/text.hpp"
#include "datascout/ragindex.hpp"

namespace datascout::layout {

enum class NodeKind { kRecord, kQuery };

inline std::string_view to_string(NodeKind k) { return k == NodeKind::kRecord ? "record" : "query"; }

struct Node {
  std::string id;
  NodeKind kind = NodeKind::kRecord;
};

struct Edge {
  std::string a;
  std::string b;
  double weight = 0.0;
};

struct SimilarityGraph {
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  const Node* find(std::string_view id) const {
    for (const auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }
};

struct GraphOptions {
  double edge_threshold = 0.5;
  std::size_t max_degree = 10;
  std::size_t query_k = 10;       // records linked to the query node
  std::size_t max_nodes = 0;      // 0: no cap; else nearest records to the query
  ragindex::LevelFilter filter = ragindex::LevelFilter::kRecord;
};

inline constexpr std::string_view kQueryNodeId = "query";

/// Record nodes with edges where cosine >= threshold, keeping an edge only if
/// it is among the max_degree strongest of both endpoints. An optional query
/// node links to its query_k most similar records (positive cosine only).
inline SimilarityGraph build_graph(const ragindex::VectorIndex& index,
                                   const std::optional<std::vector<double>>& query_vector = std::nullopt,
                                   const GraphOptions& options = {}) {
  require(!index.empty(), ErrorCode::kEmptyIndex, "index is empty");
  std::vector<const ragindex::IndexEntry*> members;
  for (const auto& e : index.entries()) {
    if (ragindex::matches(e.level, options.filter)) members.push_back(&e);
  }
  std::vector<double> query_scores;
  if (query_vector) {
    for (const auto* e : members) query_scores.push_back(ragindex::cosine(*query_vector, e->vector));
  }
  // canonical order: by descending query score when a query is given, then id
  std::vector<std::size_t> order(members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (query_vector && query_scores[a] != query_scores[b]) return query_scores[a] > query_scores[b];
    return members[a]->entry_id < members[b]->entry_id;
  });
  if (options.max_nodes > 0) {
    const std::size_t cap = query_vector ? (options.max_nodes > 1 ? options.max_nodes - 1 : 0) : options.max_nodes;
    if (order.size() > cap) order.resize(cap);
  }

  SimilarityGraph g;
  for (auto i : order) g.nodes.push_back({members[i]->entry_id, NodeKind::kRecord});

  const std::size_t n = order.size();
  std::vector<std::vector<std::pair<double, std::size_t>>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = ragindex::cosine(members[order[i]]->vector, members[order[j]]->vector);
      if (c >= options.edge_threshold && c > 0.0) {
        candidates[i].push_back({c, j});
        candidates[j].push_back({c, i});
      }
    }
  }
  std::vector<std::vector<std::size_t>> kept(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = candidates[i];
    std::sort(c.begin(), c.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return members[order[x.second]]->entry_id < members[order[y.second]]->entry_id;
    });
    for (std::size_t k = 0; k < std::min(options.max_degree, c.size()); ++k) kept[i].push_back(c[k].second);
    std::sort(kept[i].begin(), kept[i].end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [w, j] : candidates[i]) {
      if (j <= i) continue;
      if (std::binary_search(kept[i].begin(), kept[i].end(), j) && std::binary_search(kept[j].begin(), kept[j].end(), i)) {
        g.edges.push_back({g.nodes[i].id, g.nodes[j].id, std::min(1.0, w)});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  if (query_vector) {
    std::string qid(kQueryNodeId);
    while (index.find(qid)) qid += "_";
    g.nodes.push_back({qid, NodeKind::kQuery});
    std::size_t linked = 0;
    for (std::size_t i = 0; i < n && linked < options.query_k; ++i) {
      const double s = query_scores[order[i]];
      if (s <= 0.0) break;
      g.edges.push_back({qid, g.nodes[i].id, std::min(1.0, s)});
      ++linked;
    }
  }
  return g;
}

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct GraphLayout {
  std::map<std::string, Point> positions;      // rescaled into the unit square
  std::map<std::string, Point> raw_positions;  // before rescaling
  int iterations_run = 0;
  std::uint64_t seed = 0;
};

inline constexpr double kInitialTemperature = 0.1;
inline constexpr double kMinDistance = 1e-9;

/// Fruchterman-Reingold on a unit-area frame: k = sqrt(1/n), repulsion k^2/d
/// between all pairs, attraction w*d^2/k along edges, displacement capped by
/// a temperature cooling linearly from 0.1 to 0. Nodes are processed in id
/// order so the result does not depend on input order. The final positions
/// are scaled uniformly and centred in [0, 1]^2.
inline GraphLayout fr_layout(const SimilarityGraph& graph, int iterations = 300, std::uint64_t seed = 42) {
  require(!graph.nodes.empty(), ErrorCode::kPrecondition, "layout needs at least one node");
  require(iterations >= 0, ErrorCode::kInvalidArgument, "iterations must be >= 0");
  std::vector<std::string> ids;
  for (const auto& n : graph.nodes) ids.push_back(n.id);
  std::sort(ids.begin(), ids.end());
  require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), ErrorCode::kInvalidArgument, "duplicate node id");
  std::map<std::string, std::size_t> pos_of;
  for (std::size_t i = 0; i < ids.size(); ++i) pos_of[ids[i]] = i;

  struct E {
    std::size_t a, b;
    double w;
  };
  std::vector<E> edges;
  for (const auto& e : graph.edges) {
    require(pos_of.count(e.a) && pos_of.count(e.b), ErrorCode::kInvalidArgument, "edge references unknown node");
    require(e.a != e.b, ErrorCode::kInvalidArgument, "self edge on " + e.a);
    auto a = pos_of[e.a], b = pos_of[e.b];
    if (a > b) std::swap(a, b);
    edges.push_back({a, b, e.weight});
  }
  std::sort(edges.begin(), edges.end(), [](const E& x, const E& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });

  const std::size_t n = ids.size();
  const double k = std::sqrt(1.0 / static_cast<double>(n));
  Rng rng(seed);
  std::vector<Point> p(n);
  for (auto& pt : p) {
    pt.x = rng.uniform();
    pt.y = rng.uniform();
  }

  std::vector<Point> disp(n);
  for (int it = 0; it < iterations; ++it) {
    const double t = kInitialTemperature * (1.0 - static_cast<double>(it) / static_cast<double>(iterations));
    std::fill(disp.begin(), disp.end(), Point{});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double dx = p[i].x - p[j].x, dy = p[i].y - p[j].y;
        double d = std::hypot(dx, dy);
        if (d < kMinDistance) {
          // coincident nodes: push apart along a fixed diagonal
          dx = dy = kMinDistance;
          d = std::hypot(dx, dy);
        }
        const double f = k * k / d;
        disp[i].x += dx / d * f;
        disp[i].y += dy / d * f;
        disp[j].x -= dx / d * f;
        disp[j].y -= dy / d * f;
      }
    }
    for (const auto& e : edges) {
      const double dx = p[e.a].x - p[e.b].x, dy = p[e.a].y - p[e.b].y;
      const double d = std::max(std::hypot(dx, dy), kMinDistance);
      const double f = e.w * d * d / k;
      disp[e.a].x -= dx / d * f;
      disp[e.a].y -= dy / d * f;
      disp[e.b].x += dx / d * f;
      disp[e.b].y += dy / d * f;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double len = std::hypot(disp[i].x, disp[i].y);
      if (len <= 0.0) continue;
      const double step = std::min(len, t);
      p[i].x += disp[i].x / len * step;
      p[i].y += disp[i].y / len * step;
    }
  }

  GraphLayout out;
  out.iterations_run = iterations;
  out.seed = seed;
  double minx = p[0].x, maxx = p[0].x, miny = p[0].y, maxy = p[0].y;
  for (const auto& pt : p) {
    minx = std::min(minx, pt.x);
    maxx = std::max(maxx, pt.x);
    miny = std::min(miny, pt.y);
    maxy = std::max(maxy, pt.y);
  }
  const double extent = std::max(maxx - minx, maxy - miny);
  const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
  for (std::size_t i = 0; i < n; ++i) {
    out.raw_positions[ids[i]] = p[i];
    Point q{0.5, 0.5};
    if (extent > 0.0) {
      q.x = std::clamp(0.5 + (p[i].x - cx) / extent, 0.0, 1.0);
      q.y = std::clamp(0.5 + (p[i].y - cy) / extent, 0.0, 1.0);
    }
    out.positions[ids[i]] = q;
  }
  return out;
}

/// {nodes:[{id,kind,x,y}], edges:[{a,b,w}]}
inline nlohmann::json layout_json(const SimilarityGraph& graph, const GraphLayout& layout) {
  nlohmann::json j = {{"nodes", nlohmann::json::array()}, {"edges", nlohmann::json::array()}};
  for (const auto& n : graph.nodes) {
    const auto& p = layout.positions.at(n.id);
    j["nodes"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}, {"x", p.x}, {"y", p.y}});
  }
  for (const auto& e : graph.edges) j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"w", e.weight}});
  return j;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// Static SVG rendering: edge width follows weight, the query node is red.
inline std::string render_svg(const SimilarityGraph& graph, const GraphLayout& layout, int size = 800) {
  const double margin = 40.0, span = size - 2 * margin;
  auto px = [&](const Point& p) { return std::pair{margin + p.x * span, margin + p.y * span}; };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& e : graph.edges) {
    auto [x1, y1] = px(layout.positions.at(e.a));
    auto [x2, y2] = px(layout.positions.at(e.b));
    svg << "<line x1=\"" << text::format_fixed(x1, 2) << "\" y1=\"" << text::format_fixed(y1, 2) << "\" x2=\""
        << text::format_fixed(x2, 2) << "\" y2=\"" << text::format_fixed(y2, 2) << "\" stroke=\"#888\" stroke-width=\""
        << text::format_fixed(0.5 + 3.0 * e.weight, 2) << "\"/>\n";
  }
  for (const auto& n : graph.nodes) {
    auto [x, y] = px(layout.positions.at(n.id));
    const bool q = n.kind == NodeKind::kQuery;
    svg << "<circle cx=\"" << text::format_fixed(x, 2) << "\" cy=\"" << text::format_fixed(y, 2) << "\" r=\""
        << (q ? 9 : 6) << "\" fill=\"" << (q ? "#d62728" : "#1f77b4") << "\"><title>" << xml_escape(n.id)
        << "</title></circle>\n";
    svg << "<text x=\"" << text::format_fixed(x + 8, 2) << "\" y=\"" << text::format_fixed(y - 8, 2)
        << "\" font-size=\"10\" font-family=\"sans-serif\">" << xml_escape(n.id) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace datascout::layout
