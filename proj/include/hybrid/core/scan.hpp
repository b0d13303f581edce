#pragma once

#include "hybrid/core/block.hpp"

namespace hybrid::core {

/// Sequential state update s_k = update(s_{k-1}, x_k, dt_k).
///
/// The update block takes three ports: state (state_dim), input, and a
/// length-1 vector holding the time step. Its output is the next state.
class RecurrentBlock {
 public:
  RecurrentBlock(Block update, Vector init_state);

  const Block& update() const { return update_; }
  const Vector& init_state() const { return init_; }
  Eigen::Index state_dim() const { return init_.size(); }
  Eigen::Index input_dim() const { return update_.in_dims()[1]; }

  RecurrentBlock with_init_state(Vector s) const { return RecurrentBlock(update_, std::move(s)); }

 private:
  Block update_;
  Vector init_;
};

/// Runs the recurrence over `inputs`. The initial state is taken to hold at
/// `start_time`, which must precede the first input timestamp; each step's dt
/// is the gap to the previous timestamp. Returns one state per input sample.
TimeSeries scan(const RecurrentBlock& rb, const TimeSeries& inputs, double start_time);

}  // namespace hybrid::core
