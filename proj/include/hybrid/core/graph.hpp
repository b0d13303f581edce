#pragma once

#include "hybrid/core/block.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace hybrid::core {

/// Directed connection from the (single) output of `from` to input port
/// `to_port` of node `to`. `from` names either a node or a graph input.
struct Edge {
  std::string from;
  std::string to;
  std::size_t to_port = 0;
};

struct GraphInput {
  std::string name;
  Eigen::Index dim = 0;
};

struct GraphNode {
  std::string id;
  Block block;
};

/// A block diagram: named external inputs, nodes, port-to-port edges and the
/// list of sources exposed as outputs.
struct ModelGraph {
  std::vector<GraphInput> inputs;
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  std::vector<std::string> outputs;
};

struct Diagnostic {
  enum class Kind { DuplicateName, UnknownEndpoint, BadPort, Unwired, MultiplyWired, DimensionMismatch, Cycle, BadOutput };
  Kind kind;
  std::string message;
};

/// Empty result means the graph is acyclic, fully wired and
/// dimension-consistent.
std::vector<Diagnostic> validate_graph(const ModelGraph& g);

/// Evaluates a valid graph; returns one vector per declared output.
/// Throws InvalidArgument listing the diagnostics if the graph is invalid.
std::vector<Vector> evaluate_graph(const ModelGraph& g, std::span<const Vector> inputs);

/// Wraps a valid single-output graph as a Block taking the graph inputs in
/// declaration order.
Block graph_block(ModelGraph g, std::string name = "graph");

/// Builds blocks from a kind name plus string parameters.
class NodeRegistry {
 public:
  using Factory = std::function<Block(const std::map<std::string, std::string>&)>;

  /// Registry pre-populated with identity, constant, sum, scale, linear,
  /// slice and concat.
  NodeRegistry();

  void add(std::string kind, Factory factory);
  Block make(const std::string& kind, const std::map<std::string, std::string>& params) const;
  bool contains(const std::string& kind) const { return factories_.count(kind) != 0; }

 private:
  std::map<std::string, Factory> factories_;
};

/// Reads a graph from plain text:
///
///     input.x = 2
///     node.a = scale dim=2 factor=3
///     edge = x -> a.0
///     output = a
///
/// Nodes are built by `registry`. Throws ConfigError with line numbers.
ModelGraph parse_graph(std::string_view text, const NodeRegistry& registry);

/// Inverse of parse_graph. Every node block must carry a BlockSpec.
std::string write_graph(const ModelGraph& g);

}  // namespace hybrid::core
