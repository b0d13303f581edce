#include "hybrid/core/scan.hpp"

namespace hybrid::core {

RecurrentBlock::RecurrentBlock(Block update, Vector init_state)
    : update_(std::move(update)), init_(std::move(init_state)) {
  if (update_.arity() != 3) throw DimensionError("recurrent update must take (state, input, dt)");
  if (update_.in_dims()[0] != init_.size() || update_.out_dim() != init_.size()) {
    throw DimensionError("recurrent update state dimension does not match init_state length " +
                         std::to_string(init_.size()));
  }
  if (update_.in_dims()[2] != 1) throw DimensionError("recurrent update dt port must have length 1");
}

TimeSeries scan(const RecurrentBlock& rb, const TimeSeries& inputs, double start_time) {
  inputs.validate();
  if (!inputs.empty() && !(inputs.times.front() > start_time)) {
    throw InvalidArgument("scan: first timestamp must be after the start time");
  }
  TimeSeries out;
  out.times = inputs.times;
  out.values.reserve(inputs.size());
  Vector state = rb.init_state();
  double prev = start_time;
  Vector dt(1);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    dt(0) = inputs.times[k] - prev;
    state = rb.update().eval({state, inputs.values[k], dt});
    out.values.push_back(state);
    prev = inputs.times[k];
  }
  return out;
}

}  // namespace hybrid::core
