#include "glassasr/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace glassasr {

BalancedBatchSampler::BalancedBatchSampler(std::size_t real_count, std::size_t simulated_count, std::size_t batch_size,
                                           std::uint64_t seed)
    : real_count_(real_count), simulated_count_(simulated_count), half_(batch_size / 2), rng_(seed) {
  if (batch_size == 0 || batch_size % 2 != 0) throw std::invalid_argument("batch_size must be even and positive");
  if (real_count == 0) throw std::invalid_argument("real manifest is empty");
  if (simulated_count == 0) throw std::invalid_argument("simulated manifest is empty");
  order_.resize(real_count_);
  start_epoch();
}

void BalancedBatchSampler::start_epoch() {
  std::iota(order_.begin(), order_.end(), 0);
  shuffle<std::size_t>(order_, rng_);
  cursor_ = 0;
}

Batch BalancedBatchSampler::next() {
  if (cursor_ == real_count_) {
    start_epoch();
    ++epoch_;
  }
  Batch b;
  b.epoch = epoch_;
  for (std::size_t i = 0; i < half_; ++i) {
    if (cursor_ == real_count_) {
      start_epoch();
      ++epoch_;
    }
    b.real.push_back(order_[cursor_++]);
    b.real_epoch.push_back(epoch_);
    b.simulated.push_back(uniform_index(rng_, simulated_count_));
  }
  return b;
}

}  // namespace glassasr
