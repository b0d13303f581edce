#include "hybrid/core/block.hpp"
#include "hybrid/core/combinators.hpp"
#include "hybrid/core/graph.hpp"
#include "hybrid/core/scan.hpp"

#include <doctest.h>

#include <random>

using namespace hybrid;
using namespace hybrid::core;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Block affine_scalar(double a, double b) {
  return function_block("affine", 1, 1, [a, b](const Vector& x) { return Vector(a * x.array() + b); });
}

// Random dense map R^n -> R^m built from a seeded generator.
Block random_tanh_block(std::mt19937_64& rng, Eigen::Index n, Eigen::Index m) {
  std::normal_distribution<double> nd;
  Matrix w(m, n);
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = nd(rng);
  return function_block("rand", n, m, [w](const Vector& x) { return Vector((w * x).array().tanh()); });
}

Vector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(rng);
  return v;
}

// Closed-form projection onto {z : z1 + z2 = 1}.
Block simplex_line_projector() {
  return function_block("proj", 2, 2, [](const Vector& z) {
    const double shift = (1.0 - z.sum()) / 2.0;
    return Vector(z.array() + shift);
  });
}

}  // namespace

TEST_CASE("eval_block elementary blocks") {
  CHECK(identity_block(2)(vec({1, 2})) == vec({1, 2}));
  CHECK(constant_block(Vector::Zero(3)).eval(std::span<const Vector>{}) == Vector::Zero(3));
  CHECK(sum_block(2, 2).eval({vec({1, 2}), vec({3, 4})}) == vec({4, 6}));
}

TEST_CASE("eval_block rejects mismatched inputs naming the port") {
  const auto s = sum_block(2, 2);
  try {
    s.eval({vec({1, 2}), vec({3, 4, 5})});
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("port 1") != std::string::npos);
  }
  CHECK_THROWS_AS(s.eval({vec({1, 2})}), DimensionError);
}

TEST_CASE("block output length is enforced") {
  const auto bad = function_block("bad", 1, 2, [](const Vector& x) { return x; });
  CHECK_THROWS_AS(bad(vec({1})), DimensionError);
}

TEST_CASE("compose_delta") {
  const auto p = identity_block(1);
  const auto zero = scale_block(1, 0.0);
  CHECK(compose_delta(p, zero)(vec({3.5})) == vec({3.5}));
  CHECK(compose_delta(scale_block(1, 2), scale_block(1, 3))(vec({1}))(0) == doctest::Approx(5));
  CHECK_THROWS_AS(compose_delta(identity_block(1), identity_block(2)), DimensionError);
}

TEST_CASE("compose_chain") {
  CHECK(compose_chain(affine_scalar(1, 1), affine_scalar(2, 0))(vec({0}))(0) == 2);
  const auto second = affine_scalar(-3, 0.5);
  const auto chained = compose_chain(identity_block(1), second);
  CHECK(chained(vec({0.7})) == second(vec({0.7})));
  CHECK_THROWS_AS(compose_chain(identity_block(2), identity_block(3)), DimensionError);
}

TEST_CASE("compose_feature") {
  const auto pass_v = Block("v", {1, 1}, 1, [](std::span<const Vector> in) { return in[1]; });
  CHECK(compose_feature(pass_v, identity_block(1))(vec({4}))(0) == 4);
  const auto add = Block("add", {1, 1}, 1, [](std::span<const Vector> in) { return Vector(in[0] + in[1]); });
  CHECK(compose_feature(add, scale_block(1, 2))(vec({3}))(0) == 9);
  CHECK_THROWS_AS(compose_feature(identity_block(1), identity_block(1)), DimensionError);
  CHECK_THROWS_AS(compose_feature(add, identity_block(2)), DimensionError);
}

TEST_CASE("compose_constrained projects onto the constraint set") {
  const auto h = compose_constrained(constant_block(vec({0, 0})), simplex_line_projector());
  const Vector z = h.eval(std::span<const Vector>{});
  CHECK(z(0) == doctest::Approx(0.5));
  CHECK(z(1) == doctest::Approx(0.5));
  const auto feasible = compose_constrained(identity_block(2), simplex_line_projector());
  CHECK(feasible(vec({0.25, 0.75})) == vec({0.25, 0.75}));
  CHECK_THROWS_AS(compose_constrained(identity_block(3), simplex_line_projector()), DimensionError);
}

TEST_CASE("nested composition stays a block") {
  const auto inner = compose_constrained(identity_block(2), simplex_line_projector());
  const auto chain = compose_chain(inner, scale_block(2, 2.0));
  const auto delta = compose_delta(chain, identity_block(2));
  const Vector x = vec({0.3, -0.1});
  const Vector expected = 2.0 * simplex_line_projector()(x) + x;
  CHECK((delta(x) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("delta commutes with evaluation on random blocks") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_tanh_block(rng, 3, 2);
    const auto d = random_tanh_block(rng, 3, 2);
    const Vector x = random_vector(rng, 3);
    CHECK((compose_delta(p, d)(x) - (p(x) + d(x))).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("chain associativity") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_tanh_block(rng, 3, 4);
    const auto b = random_tanh_block(rng, 4, 2);
    const auto c = random_tanh_block(rng, 2, 3);
    const Vector x = random_vector(rng, 3);
    const Vector left = compose_chain(a, compose_chain(b, c))(x);
    const Vector right = compose_chain(compose_chain(a, b), c)(x);
    CHECK((left - right).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

namespace {

Block running_sum_update() {
  return Block("acc", {1, 1, 1}, 1, [](std::span<const Vector> in) { return Vector(in[0] + in[1]); });
}

}  // namespace

TEST_CASE("scan") {
  const auto hold = Block("hold", {2, 1, 1}, 2, [](std::span<const Vector> in) { return in[0]; });
  const auto ts = TimeSeries::scalar({1, 2, 3}, {5, 6, 7});
  const auto held = scan(RecurrentBlock(hold, vec({1, -1})), ts, 0.0);
  REQUIRE(held.size() == 3);
  for (const auto& s : held.values) CHECK(s == vec({1, -1}));

  const auto sums = scan(RecurrentBlock(running_sum_update(), vec({0})), TimeSeries::scalar({1, 2, 3}, {1, 1, 1}), 0.0);
  CHECK(sums.component(0) == std::vector<double>{1, 2, 3});

  CHECK_THROWS_AS(scan(RecurrentBlock(running_sum_update(), vec({0})), TimeSeries::scalar({1, 1, 3}, {1, 1, 1}), 0.0),
                  InvalidArgument);
  CHECK_THROWS_AS(RecurrentBlock(running_sum_update(), vec({0, 0})), DimensionError);
}

TEST_CASE("scan passes the timestamp gaps as dt") {
  const auto dt_only = Block("dt", {1, 1, 1}, 1, [](std::span<const Vector> in) { return in[2]; });
  const auto out = scan(RecurrentBlock(dt_only, vec({0})), TimeSeries::scalar({0.5, 0.75, 2.0}, {0, 0, 0}), 0.0);
  CHECK(out.component(0) == std::vector<double>{0.5, 0.25, 1.25});
}

TEST_CASE("scan over concatenated segments equals scan of the whole") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> gap(0.01, 0.5);
  std::normal_distribution<double> nd;
  const auto update = Block("nl", {2, 1, 1}, 2, [](std::span<const Vector> in) {
    const double dt = in[2](0);
    Vector s = in[0];
    s(0) += dt * std::sin(s(1)) + in[1](0);
    s(1) = 0.9 * s(1) + dt * s(0);
    return s;
  });
  TimeSeries all;
  double t = 0;
  for (int k = 0; k < 40; ++k) {
    t += gap(rng);
    all.times.push_back(t);
    all.values.push_back(Vector::Constant(1, nd(rng)));
  }
  const RecurrentBlock rb(update, vec({0.1, -0.2}));
  const auto whole = scan(rb, all, 0.0);
  TimeSeries first, second;
  first.times.assign(all.times.begin(), all.times.begin() + 17);
  first.values.assign(all.values.begin(), all.values.begin() + 17);
  second.times.assign(all.times.begin() + 17, all.times.end());
  second.values.assign(all.values.begin() + 17, all.values.end());
  const auto a = scan(rb, first, 0.0);
  const auto b = scan(rb.with_init_state(a.values.back()), second, first.times.back());
  for (std::size_t k = 0; k < second.size(); ++k) CHECK(b.values[k] == whole.values[17 + k]);
}

TEST_CASE("validate_graph") {
  ModelGraph ok;
  ok.inputs = {{"x", 2}};
  ok.nodes = {{"id", identity_block(2)}};
  ok.edges = {{"x", "id", 0}};
  ok.outputs = {"id"};
  CHECK(validate_graph(ok).empty());
  CHECK(evaluate_graph(ok, std::vector<Vector>{vec({1, 2})}).front() == vec({1, 2}));

  ModelGraph loop;
  loop.nodes = {{"a", identity_block(1)}};
  loop.edges = {{"a", "a", 0}};
  loop.outputs = {"a"};
  const auto cyc = validate_graph(loop);
  REQUIRE(cyc.size() == 1);
  CHECK(cyc[0].kind == Diagnostic::Kind::Cycle);

  ModelGraph mismatch;
  mismatch.inputs = {{"x", 2}};
  mismatch.nodes = {{"b", identity_block(3)}};
  mismatch.edges = {{"x", "b", 0}};
  mismatch.outputs = {"b"};
  const auto dm = validate_graph(mismatch);
  REQUIRE(dm.size() == 1);
  CHECK(dm[0].kind == Diagnostic::Kind::DimensionMismatch);
  CHECK(dm[0].message.find("x -> b.0") != std::string::npos);

  ModelGraph unwired;
  unwired.inputs = {{"x", 1}};
  unwired.nodes = {{"s", sum_block(1, 2)}};
  unwired.edges = {{"x", "s", 0}, {"x", "s", 0}};
  unwired.outputs = {"s"};
  const auto uw = validate_graph(unwired);
  CHECK(uw.size() == 2);
  CHECK_THROWS_AS(evaluate_graph(unwired, std::vector<Vector>{vec({1})}), InvalidArgument);
}

TEST_CASE("graph text round trip and evaluation") {
  const std::string text = R"(# delta of scaled input and constant
input.x = 2
node.p = scale dim=2 factor=3
node.d = linear rows=2 cols=2 matrix=1,0,0,-1 offset=0.5,0.5
node.h = sum dim=2 arity=2
edge = x -> p.0
edge = x -> d.0
edge = p.out -> h.0
edge = d -> h.1
output = h
)";
  NodeRegistry reg;
  const auto g = parse_graph(text, reg);
  CHECK(validate_graph(g).empty());
  const Vector x = vec({1, 2});
  const Vector out = evaluate_graph(g, std::vector<Vector>{x}).front();
  CHECK(out == vec({3 + 1 + 0.5, 6 - 2 + 0.5}));

  const auto again = parse_graph(write_graph(g), reg);
  CHECK(write_graph(again) == write_graph(g));
  CHECK(evaluate_graph(again, std::vector<Vector>{x}).front() == out);
  CHECK(graph_block(again)(x) == out);
}

TEST_CASE("graph parse errors carry line numbers") {
  NodeRegistry reg;
  try {
    parse_graph("input.x = 1\nnode.a = warp dim=1\n", reg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_graph("edge = a b\n", reg), ConfigError);
}
