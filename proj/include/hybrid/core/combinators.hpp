#pragma once

#include "hybrid/core/block.hpp"

namespace hybrid::core {

/// Delta model: H(x) = P(x) + D(x). Both blocks must share their input
/// signature and output dimension.
Block compose_delta(const Block& p, const Block& d);

/// Physics-based preprocessing: H(x) = second(first(x)). `second` must take a
/// single input of dimension first.out_dim().
Block compose_chain(const Block& first, const Block& second);

/// Feature learning: H(x) = P(x, D(x)). `p` takes two ports (x, v); `d` takes
/// x and produces v.
Block compose_feature(const Block& p, const Block& d);

/// Hard constraint: H(x) = projector(D(x)), where the projector maps any
/// vector into its constraint set.
Block compose_constrained(const Block& d, const Block& projector);

/// Complementary fusion of two blocks with identical signatures:
/// H(x) = low(P(x)) + high(D(x)), with `low` and `high` single-port filters.
Block compose_complementary(const Block& p, const Block& d, const Block& low, const Block& high);

}  // namespace hybrid::core
