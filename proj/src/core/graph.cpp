#include "hybrid/core/graph.hpp"

#include "hybrid/kv.hpp"

#include <queue>
#include <set>
#include <sstream>

namespace hybrid::core {

namespace {

std::string edge_label(const Edge& e) { return e.from + " -> " + e.to + "." + std::to_string(e.to_port); }

struct Index {
  std::map<std::string, Eigen::Index> source_dims;  // inputs and nodes
  std::map<std::string, std::size_t> node_pos;
};

Index build_index(const ModelGraph& g, std::vector<Diagnostic>& diags) {
  Index idx;
  for (const auto& in : g.inputs) {
    if (!idx.source_dims.emplace(in.name, in.dim).second) {
      diags.push_back({Diagnostic::Kind::DuplicateName, "duplicate name '" + in.name + "'"});
    }
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    if (!idx.source_dims.emplace(n.id, n.block.out_dim()).second) {
      diags.push_back({Diagnostic::Kind::DuplicateName, "duplicate name '" + n.id + "'"});
    }
    idx.node_pos.emplace(n.id, i);
  }
  return idx;
}

// Kahn's algorithm over node-to-node edges; returns node positions in
// evaluation order, or fewer than nodes.size() entries if a cycle exists.
std::vector<std::size_t> topo_order(const ModelGraph& g, const Index& idx) {
  std::vector<std::size_t> indeg(g.nodes.size(), 0);
  std::vector<std::vector<std::size_t>> succ(g.nodes.size());
  for (const auto& e : g.edges) {
    auto from = idx.node_pos.find(e.from);
    auto to = idx.node_pos.find(e.to);
    if (from == idx.node_pos.end() || to == idx.node_pos.end()) continue;
    succ[from->second].push_back(to->second);
    ++indeg[to->second];
  }
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < indeg.size(); ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const auto i = ready.front();
    ready.pop();
    order.push_back(i);
    for (auto j : succ[i])
      if (--indeg[j] == 0) ready.push(j);
  }
  return order;
}

}  // namespace

std::vector<Diagnostic> validate_graph(const ModelGraph& g) {
  std::vector<Diagnostic> diags;
  const Index idx = build_index(g, diags);

  std::map<std::pair<std::string, std::size_t>, int> wired;
  for (const auto& e : g.edges) {
    const auto src = idx.source_dims.find(e.from);
    const auto dst = idx.node_pos.find(e.to);
    if (src == idx.source_dims.end()) {
      diags.push_back({Diagnostic::Kind::UnknownEndpoint, "edge " + edge_label(e) + ": unknown source '" + e.from + "'"});
      continue;
    }
    if (dst == idx.node_pos.end()) {
      diags.push_back({Diagnostic::Kind::UnknownEndpoint, "edge " + edge_label(e) + ": unknown node '" + e.to + "'"});
      continue;
    }
    const Block& target = g.nodes[dst->second].block;
    if (e.to_port >= target.arity()) {
      diags.push_back({Diagnostic::Kind::BadPort, "edge " + edge_label(e) + ": node '" + e.to + "' has " +
                                                     std::to_string(target.arity()) + " input ports"});
      continue;
    }
    ++wired[{e.to, e.to_port}];
    if (src->second != target.in_dims()[e.to_port]) {
      diags.push_back({Diagnostic::Kind::DimensionMismatch,
                       "edge " + edge_label(e) + ": source has dimension " + std::to_string(src->second) +
                           ", port expects " + std::to_string(target.in_dims()[e.to_port])});
    }
  }
  for (const auto& n : g.nodes) {
    for (std::size_t p = 0; p < n.block.arity(); ++p) {
      const auto it = wired.find({n.id, p});
      const int count = it == wired.end() ? 0 : it->second;
      if (count == 0) {
        diags.push_back({Diagnostic::Kind::Unwired, "node '" + n.id + "' port " + std::to_string(p) + " has no incoming edge"});
      } else if (count > 1) {
        diags.push_back({Diagnostic::Kind::MultiplyWired,
                         "node '" + n.id + "' port " + std::to_string(p) + " has " + std::to_string(count) + " incoming edges"});
      }
    }
  }
  const auto order = topo_order(g, idx);
  if (order.size() != g.nodes.size()) {
    std::set<std::size_t> done(order.begin(), order.end());
    std::string members;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
      if (!done.count(i)) members += (members.empty() ? "" : ", ") + g.nodes[i].id;
    diags.push_back({Diagnostic::Kind::Cycle, "cycle through nodes: " + members});
  }
  if (g.outputs.empty()) diags.push_back({Diagnostic::Kind::BadOutput, "graph declares no outputs"});
  for (const auto& o : g.outputs) {
    if (!idx.source_dims.count(o)) diags.push_back({Diagnostic::Kind::BadOutput, "output '" + o + "' is not a node or input"});
  }
  return diags;
}

std::vector<Vector> evaluate_graph(const ModelGraph& g, std::span<const Vector> inputs) {
  const auto diags = validate_graph(g);
  if (!diags.empty()) {
    std::string msg = "invalid graph:";
    for (const auto& d : diags) msg += "\n  " + d.message;
    throw InvalidArgument(msg);
  }
  if (inputs.size() != g.inputs.size()) {
    throw DimensionError("graph expects " + std::to_string(g.inputs.size()) + " inputs, got " + std::to_string(inputs.size()));
  }
  std::map<std::string, Vector> values;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != g.inputs[i].dim) {
      throw DimensionError("graph input '" + g.inputs[i].name + "' (port " + std::to_string(i) + "): expected length " +
                           std::to_string(g.inputs[i].dim) + ", got " + std::to_string(inputs[i].size()));
    }
    values[g.inputs[i].name] = inputs[i];
  }
  std::vector<Diagnostic> unused;
  const Index idx = build_index(g, unused);
  std::map<std::pair<std::string, std::size_t>, std::string> feed;
  for (const auto& e : g.edges) feed[{e.to, e.to_port}] = e.from;
  for (auto pos : topo_order(g, idx)) {
    const auto& n = g.nodes[pos];
    std::vector<Vector> args;
    args.reserve(n.block.arity());
    for (std::size_t p = 0; p < n.block.arity(); ++p) args.push_back(values.at(feed.at({n.id, p})));
    values[n.id] = n.block.eval(args);
  }
  std::vector<Vector> out;
  for (const auto& o : g.outputs) out.push_back(values.at(o));
  return out;
}

Block graph_block(ModelGraph g, std::string name) {
  const auto diags = validate_graph(g);
  if (!diags.empty()) throw InvalidArgument("graph_block: " + diags.front().message);
  if (g.outputs.size() != 1) throw InvalidArgument("graph_block: graph must have exactly one output");
  std::vector<Diagnostic> unused;
  const Eigen::Index out_dim = build_index(g, unused).source_dims.at(g.outputs.front());
  std::vector<Eigen::Index> dims;
  for (const auto& in : g.inputs) dims.push_back(in.dim);
  auto shared = std::make_shared<const ModelGraph>(std::move(g));
  return Block(std::move(name), std::move(dims), out_dim,
               [shared](std::span<const Vector> in) { return evaluate_graph(*shared, in).front(); });
}

// ---------------------------------------------------------------------------
// Registry and text form

namespace {

const std::string& require(const std::map<std::string, std::string>& params, const std::string& key,
                           const std::string& kind) {
  const auto it = params.find(key);
  if (it == params.end()) throw ConfigError("node kind '" + kind + "' requires parameter '" + key + "'");
  return it->second;
}

Eigen::Index require_dim(const std::map<std::string, std::string>& params, const std::string& key,
                         const std::string& kind) {
  return static_cast<Eigen::Index>(parse_int(require(params, key, kind), kind + "." + key));
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

NodeRegistry::NodeRegistry() {
  add("identity", [](const auto& p) { return identity_block(require_dim(p, "dim", "identity")); });
  add("constant", [](const auto& p) {
    return constant_block(to_vector(parse_double_list(require(p, "value", "constant"), "constant.value")));
  });
  add("sum", [](const auto& p) {
    return sum_block(require_dim(p, "dim", "sum"), static_cast<std::size_t>(require_dim(p, "arity", "sum")));
  });
  add("scale", [](const auto& p) {
    return scale_block(require_dim(p, "dim", "scale"), parse_double(require(p, "factor", "scale"), "scale.factor"));
  });
  add("linear", [](const auto& p) {
    const auto rows = require_dim(p, "rows", "linear");
    const auto cols = require_dim(p, "cols", "linear");
    const auto data = parse_double_list(require(p, "matrix", "linear"), "linear.matrix");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw ConfigError("linear.matrix: expected rows*cols values");
    Matrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), rows, cols);
    Vector offset = Vector::Zero(rows);
    if (auto it = p.find("offset"); it != p.end()) offset = to_vector(parse_double_list(it->second, "linear.offset"));
    return linear_block(std::move(m), std::move(offset));
  });
  add("slice", [](const auto& p) {
    return slice_block(require_dim(p, "dim", "slice"), require_dim(p, "begin", "slice"), require_dim(p, "count", "slice"));
  });
  add("concat", [](const auto& p) {
    std::vector<Eigen::Index> dims;
    for (double d : parse_double_list(require(p, "dims", "concat"), "concat.dims")) dims.push_back(static_cast<Eigen::Index>(d));
    return concat_block(std::move(dims));
  });
}

void NodeRegistry::add(std::string kind, Factory factory) { factories_[std::move(kind)] = std::move(factory); }

Block NodeRegistry::make(const std::string& kind, const std::map<std::string, std::string>& params) const {
  const auto it = factories_.find(kind);
  if (it == factories_.end()) throw ConfigError("unknown node kind '" + kind + "'");
  return it->second(params);
}

ModelGraph parse_graph(std::string_view text, const NodeRegistry& registry) {
  ModelGraph g;
  for (const auto& e : parse_key_values(text)) {
    const std::string where = "line " + std::to_string(e.line);
    try {
      if (e.key.rfind("input.", 0) == 0) {
        g.inputs.push_back({e.key.substr(6), static_cast<Eigen::Index>(parse_int(e.value, e.key))});
      } else if (e.key.rfind("node.", 0) == 0) {
        std::istringstream is(e.value);
        std::string kind;
        is >> kind;
        if (kind.empty()) throw ConfigError("missing node kind");
        std::map<std::string, std::string> params;
        std::string tok;
        while (is >> tok) {
          const auto eq = tok.find('=');
          if (eq == std::string::npos) throw ConfigError("node parameter '" + tok + "' is not key=value");
          params[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        Block b = registry.make(kind, params);
        const std::string id = e.key.substr(5);
        g.nodes.push_back({id, b.renamed(id)});
      } else if (e.key == "edge") {
        const auto arrow = e.value.find("->");
        if (arrow == std::string::npos) throw ConfigError("edge must read 'from -> to.port'");
        std::string from = trim(std::string_view(e.value).substr(0, arrow));
        const std::string to = trim(std::string_view(e.value).substr(arrow + 2));
        if (const auto dot = from.find('.'); dot != std::string::npos) {
          const std::string port = from.substr(dot + 1);
          if (port != "out" && port != "0") throw ConfigError("blocks have a single output port; got '" + port + "'");
          from = from.substr(0, dot);
        }
        const auto dot = to.rfind('.');
        if (dot == std::string::npos) throw ConfigError("edge target must name a port: '" + to + "'");
        const auto port = parse_int(to.substr(dot + 1), "edge port");
        if (port < 0) throw ConfigError("negative port index");
        g.edges.push_back({from, to.substr(0, dot), static_cast<std::size_t>(port)});
      } else if (e.key == "output") {
        g.outputs.push_back(e.value);
      } else {
        throw ConfigError("unknown key '" + e.key + "'");
      }
    } catch (const ConfigError& err) {
      throw ConfigError(where + ": " + err.what());
    } catch (const Error& err) {
      throw ConfigError(where + ": " + err.what());
    }
  }
  return g;
}

std::string write_graph(const ModelGraph& g) {
  std::ostringstream os;
  for (const auto& in : g.inputs) os << "input." << in.name << " = " << in.dim << "\n";
  for (const auto& n : g.nodes) {
    const auto& spec = n.block.spec();
    if (!spec) throw InvalidArgument("node '" + n.id + "' has no serializable spec");
    os << "node." << n.id << " = " << spec->kind;
    for (const auto& [k, v] : spec->params) os << " " << k << "=" << v;
    os << "\n";
  }
  for (const auto& e : g.edges) os << "edge = " << e.from << ".out -> " << e.to << "." << e.to_port << "\n";
  for (const auto& o : g.outputs) os << "output = " << o << "\n";
  return os.str();
}

}  // namespace hybrid::core
