#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrgc/graph.hpp"

namespace mrgc {

enum class AttackKind { feature, label, structure };

struct AttackSpec {
  AttackKind kind = AttackKind::feature;
  double budget_percent = 0.0;  ///< p in [0, 100]
  std::uint64_t seed = 0;
};

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);

std::string attack_spec_json(const AttackSpec& spec);
AttackSpec parse_attack_spec(const std::string& json_text);

/// floor(p% of units), robust to the binary representation of p.
std::size_t attack_budget(double budget_percent, std::size_t units);

/// Replaces the features of floor(p% n) distinct nodes with N(0, 1) draws.
Graph feature_attack(const Graph& graph, const AttackSpec& spec);

/// Moves floor(p% n) distinct nodes to a uniformly drawn other class.
Graph label_attack(const Graph& graph, const AttackSpec& spec);

/// Toggles floor(p% |E|) distinct node pairs: edges are removed and
/// non-edges added.
Graph structure_attack(const Graph& graph, const AttackSpec& spec);

/// Dispatches on spec.kind.
Graph apply_attack(const Graph& graph, const AttackSpec& spec);

/// Toggles each listed pair. Applying the same list twice is the identity.
Graph flip_pairs(const Graph& graph, const std::vector<Edge>& pairs);

}  // namespace mrgc
