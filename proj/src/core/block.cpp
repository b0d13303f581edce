#include "hybrid/core/block.hpp"

#include "hybrid/kv.hpp"

#include <sstream>

namespace hybrid::core {

namespace {

std::string join_doubles(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v(i));
  return out;
}

}  // namespace

Block::Block(std::string name, std::vector<Eigen::Index> in_dims, Eigen::Index out_dim, EvalFn eval,
             std::optional<BlockSpec> spec) {
  for (std::size_t i = 0; i < in_dims.size(); ++i) {
    if (in_dims[i] < 0) throw DimensionError("block '" + name + "': negative dimension on input port " + std::to_string(i));
  }
  if (out_dim < 0) throw DimensionError("block '" + name + "': negative output dimension");
  if (!eval) throw InvalidArgument("block '" + name + "': empty evaluation function");
  state_ = std::make_shared<const State>(
      State{std::move(name), std::move(in_dims), out_dim, std::move(eval), std::move(spec)});
}

Vector Block::eval(std::span<const Vector> inputs) const {
  const auto& s = *state_;
  if (inputs.size() != s.in_dims.size()) {
    throw DimensionError("block '" + s.name + "' expects " + std::to_string(s.in_dims.size()) +
                         " inputs, got " + std::to_string(inputs.size()));
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != s.in_dims[i]) {
      throw DimensionError("block '" + s.name + "' input port " + std::to_string(i) + ": expected length " +
                           std::to_string(s.in_dims[i]) + ", got " + std::to_string(inputs[i].size()));
    }
  }
  Vector out = s.eval(inputs);
  if (out.size() != s.out_dim) {
    throw DimensionError("block '" + s.name + "' produced length " + std::to_string(out.size()) +
                         ", declared " + std::to_string(s.out_dim));
  }
  return out;
}

Vector Block::eval(std::initializer_list<Vector> inputs) const {
  return eval(std::span<const Vector>(inputs.begin(), inputs.size()));
}

Vector Block::operator()(const Vector& x) const { return eval(std::span<const Vector>(&x, 1)); }

Block Block::renamed(std::string name) const {
  Block copy = *this;
  auto st = *state_;
  st.name = std::move(name);
  copy.state_ = std::make_shared<const State>(std::move(st));
  return copy;
}

Vector eval_block(const Block& block, std::span<const Vector> inputs) { return block.eval(inputs); }

Block identity_block(Eigen::Index dim) {
  return Block("identity", {dim}, dim, [](std::span<const Vector> in) { return in[0]; },
               BlockSpec{"identity", {{"dim", std::to_string(dim)}}});
}

Block constant_block(Vector value) {
  auto spec = BlockSpec{"constant", {{"value", join_doubles(value)}}};
  const auto dim = value.size();
  return Block("constant", {}, dim, [v = std::move(value)](std::span<const Vector>) { return v; },
               std::move(spec));
}

Block sum_block(Eigen::Index dim, std::size_t arity) {
  if (arity == 0) throw InvalidArgument("sum block needs at least one input");
  return Block("sum", std::vector<Eigen::Index>(arity, dim), dim,
               [dim](std::span<const Vector> in) {
                 Vector acc = Vector::Zero(dim);
                 for (const auto& v : in) acc += v;
                 return acc;
               },
               BlockSpec{"sum", {{"dim", std::to_string(dim)}, {"arity", std::to_string(arity)}}});
}

Block scale_block(Eigen::Index dim, double factor) {
  std::ostringstream f;
  f.precision(17);
  f << factor;
  return Block("scale", {dim}, dim, [factor](std::span<const Vector> in) { return Vector(factor * in[0]); },
               BlockSpec{"scale", {{"dim", std::to_string(dim)}, {"factor", f.str()}}});
}

Block linear_block(Matrix m, Vector offset) {
  if (offset.size() != m.rows()) throw DimensionError("linear block: offset length must equal matrix rows");
  BlockSpec spec{"linear",
                 {{"rows", std::to_string(m.rows())},
                  {"cols", std::to_string(m.cols())},
                  {"matrix", join_doubles(Eigen::Map<const Vector>(Matrix(m.transpose()).data(), m.size()))},
                  {"offset", join_doubles(offset)}}};
  const auto rows = m.rows();
  const auto cols = m.cols();
  return Block("linear", {cols}, rows,
               [m = std::move(m), b = std::move(offset)](std::span<const Vector> in) {
                 return Vector(m * in[0] + b);
               },
               std::move(spec));
}

Block slice_block(Eigen::Index in_dim, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > in_dim) throw DimensionError("slice out of range");
  return Block("slice", {in_dim}, count,
               [begin, count](std::span<const Vector> in) { return Vector(in[0].segment(begin, count)); },
               BlockSpec{"slice",
                         {{"dim", std::to_string(in_dim)},
                          {"begin", std::to_string(begin)},
                          {"count", std::to_string(count)}}});
}

Block concat_block(std::vector<Eigen::Index> dims) {
  Eigen::Index total = 0;
  for (auto d : dims) total += d;
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  return Block("concat", dims, total,
               [total](std::span<const Vector> in) {
                 Vector out(total);
                 Eigen::Index at = 0;
                 for (const auto& v : in) {
                   out.segment(at, v.size()) = v;
                   at += v.size();
                 }
                 return out;
               },
               BlockSpec{"concat", {{"dims", os.str()}}});
}

Block function_block(std::string name, Eigen::Index in_dim, Eigen::Index out_dim,
                     std::function<Vector(const Vector&)> fn) {
  return Block(std::move(name), {in_dim}, out_dim,
               [fn = std::move(fn)](std::span<const Vector> in) { return fn(in[0]); });
}

}  // namespace hybrid::core
