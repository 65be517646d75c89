#include "mrgc/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "mrgc/error.hpp"

namespace mrgc {

namespace {

void check_budget(const AttackSpec& spec) {
  if (!(spec.budget_percent >= 0.0 && spec.budget_percent <= 100.0)) {
    fail(ErrorKind::config, "attack budget_percent must lie in [0, 100]");
  }
}

/// `count` distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::feature: return "feature";
    case AttackKind::label: return "label";
    case AttackKind::structure: return "structure";
  }
  return "feature";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "feature") return AttackKind::feature;
  if (name == "label") return AttackKind::label;
  if (name == "structure") return AttackKind::structure;
  fail(ErrorKind::config, "unknown attack kind '" + std::string(name) + "'");
}

std::string attack_spec_json(const AttackSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["budget_percent"] = spec.budget_percent;
  j["seed"] = spec.seed;
  return j.dump();
}

AttackSpec parse_attack_spec(const std::string& json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    AttackSpec spec;
    spec.kind = parse_attack_kind(j.at("kind").get<std::string>());
    spec.budget_percent = j.at("budget_percent").get<double>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    check_budget(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("attack spec: ") + e.what());
  }
}

std::size_t attack_budget(double budget_percent, std::size_t units) {
  const double raw = budget_percent * static_cast<double>(units) / 100.0;
  const auto m = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::min(m, units);
}

Graph feature_attack(const Graph& graph, const AttackSpec& spec) {
  check_budget(spec);
  const std::size_t n = graph.num_nodes();
  std::mt19937_64 rng(spec.seed);
  const auto chosen = sample_without_replacement(n, attack_budget(spec.budget_percent, n), rng);
  Matrix features = graph.features();
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t node : chosen)
    for (double& v : features.row(node)) v = normal(rng);
  return Graph(std::move(features), graph.edges(), graph.labels(), graph.num_classes());
}

Graph label_attack(const Graph& graph, const AttackSpec& spec) {
  check_budget(spec);
  const int classes = graph.num_classes();
  if (classes < 2) fail(ErrorKind::single_class, "label attack needs at least 2 classes");
  const std::size_t n = graph.num_nodes();
  std::mt19937_64 rng(spec.seed);
  const auto chosen = sample_without_replacement(n, attack_budget(spec.budget_percent, n), rng);
  std::vector<int> labels = graph.labels();
  std::uniform_int_distribution<int> other(0, classes - 2);
  for (std::size_t node : chosen) {
    const int draw = other(rng);
    labels[node] = draw >= labels[node] ? draw + 1 : draw;
  }
  try {
    return Graph(graph.features(), graph.edges(), std::move(labels), classes);
  } catch (const Error& e) {
    throw e.with_context("label attack emptied a class");
  }
}

Graph flip_pairs(const Graph& graph, const std::vector<Edge>& pairs) {
  std::set<Edge> edges;
  for (const auto& e : graph.edges()) edges.insert(e);
  for (auto [u, v] : pairs) {
    if (u == v) fail(ErrorKind::invariant, "cannot flip a self-pair");
    if (u > v) std::swap(u, v);
    if (!edges.erase({u, v})) edges.insert({u, v});
  }
  return Graph(graph.features(), std::vector<Edge>(edges.begin(), edges.end()), graph.labels(),
               graph.num_classes());
}

Graph structure_attack(const Graph& graph, const AttackSpec& spec) {
  check_budget(spec);
  if (graph.num_edges() == 0) fail(ErrorKind::empty_graph, "structure attack needs at least one edge");
  const std::size_t n = graph.num_nodes();
  const std::size_t pair_count = n * (n - 1) / 2;
  const std::size_t budget =
      std::min(attack_budget(spec.budget_percent, graph.num_edges()), pair_count);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::set<Edge> seen;
  std::vector<Edge> pairs;
  while (pairs.size() < budget) {
    std::size_t u = node(rng), v = node(rng);
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (seen.insert({u, v}).second) pairs.emplace_back(u, v);
  }
  return flip_pairs(graph, pairs);
}

Graph apply_attack(const Graph& graph, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::feature: return feature_attack(graph, spec);
    case AttackKind::label: return label_attack(graph, spec);
    case AttackKind::structure: return structure_attack(graph, spec);
  }
  return graph;
}

}  // namespace mrgc
