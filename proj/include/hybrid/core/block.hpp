#pragma once

#include "hybrid/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hybrid::core {

/// Evaluation callback. Receives one vector per input port, already
/// validated against the block's declared dimensions.
using EvalFn = std::function<Vector(std::span<const Vector>)>;

/// Kind name and parameters of a block built from the node registry, kept so
/// that graphs can be written back to text.
struct BlockSpec {
  std::string kind;
  std::map<std::string, std::string> params;
};

/// A pure evaluable unit with fixed input arity and output dimension.
///
/// Blocks are immutable values: copies share the same evaluation function and
/// evaluating never changes the block, so a Block can be used concurrently
/// from any number of threads as long as its EvalFn is itself pure.
class Block {
 public:
  Block(std::string name, std::vector<Eigen::Index> in_dims, Eigen::Index out_dim, EvalFn eval,
        std::optional<BlockSpec> spec = std::nullopt);

  const std::string& name() const { return state_->name; }
  const std::vector<Eigen::Index>& in_dims() const { return state_->in_dims; }
  Eigen::Index out_dim() const { return state_->out_dim; }
  std::size_t arity() const { return state_->in_dims.size(); }
  const std::optional<BlockSpec>& spec() const { return state_->spec; }

  /// Checks arity and per-port lengths, evaluates, and checks the output
  /// length. Throws DimensionError naming the offending port.
  Vector eval(std::span<const Vector> inputs) const;
  Vector eval(std::initializer_list<Vector> inputs) const;
  /// Convenience for single-input blocks.
  Vector operator()(const Vector& x) const;

  /// Same block under a different name.
  Block renamed(std::string name) const;

 private:
  struct State {
    std::string name;
    std::vector<Eigen::Index> in_dims;
    Eigen::Index out_dim;
    EvalFn eval;
    std::optional<BlockSpec> spec;
  };
  std::shared_ptr<const State> state_;
};

Vector eval_block(const Block& block, std::span<const Vector> inputs);

// Elementary blocks.

Block identity_block(Eigen::Index dim);
Block constant_block(Vector value);
/// Componentwise sum of `arity` inputs of equal dimension.
Block sum_block(Eigen::Index dim, std::size_t arity);
Block scale_block(Eigen::Index dim, double factor);
/// x -> M x + offset.
Block linear_block(Matrix m, Vector offset);
/// Selects components [begin, begin + count) of a single input.
Block slice_block(Eigen::Index in_dim, Eigen::Index begin, Eigen::Index count);
/// Concatenates its inputs into one vector.
Block concat_block(std::vector<Eigen::Index> dims);
/// Wraps a plain function of one vector.
Block function_block(std::string name, Eigen::Index in_dim, Eigen::Index out_dim,
                     std::function<Vector(const Vector&)> fn);

}  // namespace hybrid::core
