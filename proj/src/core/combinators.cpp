#include "hybrid/core/combinators.hpp"

namespace hybrid::core {

namespace {

void require_single_input(const Block& b, Eigen::Index dim, const char* what) {
  if (b.arity() != 1) {
    throw DimensionError(std::string(what) + ": block '" + b.name() + "' must take exactly one input");
  }
  if (b.in_dims()[0] != dim) {
    throw DimensionError(std::string(what) + ": block '" + b.name() + "' expects input length " +
                         std::to_string(b.in_dims()[0]) + ", upstream produces " + std::to_string(dim));
  }
}

}  // namespace

Block compose_delta(const Block& p, const Block& d) {
  if (p.out_dim() != d.out_dim()) {
    throw DimensionError("delta: output dimensions differ (" + std::to_string(p.out_dim()) + " vs " +
                         std::to_string(d.out_dim()) + ")");
  }
  if (p.in_dims() != d.in_dims()) throw DimensionError("delta: input signatures of P and D differ");
  return Block("delta(" + p.name() + "," + d.name() + ")", p.in_dims(), p.out_dim(),
               [p, d](std::span<const Vector> in) { return Vector(p.eval(in) + d.eval(in)); });
}

Block compose_chain(const Block& first, const Block& second) {
  require_single_input(second, first.out_dim(), "chain");
  return Block("chain(" + first.name() + "," + second.name() + ")", first.in_dims(), second.out_dim(),
               [first, second](std::span<const Vector> in) { return second(first.eval(in)); });
}

Block compose_feature(const Block& p, const Block& d) {
  if (p.arity() != 2) throw DimensionError("feature: P must take two inputs (x, v)");
  if (d.arity() != 1) throw DimensionError("feature: D must take one input (x)");
  if (p.in_dims()[0] != d.in_dims()[0]) throw DimensionError("feature: P and D disagree on the length of x");
  if (p.in_dims()[1] != d.out_dim()) {
    throw DimensionError("feature: P expects v of length " + std::to_string(p.in_dims()[1]) + ", D produces " +
                         std::to_string(d.out_dim()));
  }
  return Block("feature(" + p.name() + "," + d.name() + ")", d.in_dims(), p.out_dim(),
               [p, d](std::span<const Vector> in) {
                 const Vector v = d.eval(in);
                 return p.eval({in[0], v});
               });
}

Block compose_constrained(const Block& d, const Block& projector) {
  require_single_input(projector, d.out_dim(), "constrained");
  return Block("constrained(" + d.name() + "," + projector.name() + ")", d.in_dims(), projector.out_dim(),
               [d, projector](std::span<const Vector> in) { return projector(d.eval(in)); });
}

Block compose_complementary(const Block& p, const Block& d, const Block& low, const Block& high) {
  return compose_delta(compose_chain(p, low), compose_chain(d, high));
}

}  // namespace hybrid::core
