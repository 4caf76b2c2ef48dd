#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "glassasr/random.hpp"

namespace glassasr {

struct Batch {
  std::vector<std::size_t> real;       // indices into the real manifest
  std::vector<std::size_t> simulated;  // indices into the simulated manifest
  std::vector<std::size_t> real_epoch;  // epoch of each real draw
  std::size_t epoch = 0;                // epoch of the first real draw
};

// Half-real, half-simulated batches of fixed size. Real records are drawn
// without replacement from a fresh shuffle every epoch, so each epoch covers
// the real manifest exactly once; an epoch boundary may fall inside a batch.
// Every real draw is paired with a simulated record drawn uniformly with
// replacement.
class BalancedBatchSampler {
 public:
  // Throws std::invalid_argument for an odd or zero batch size or an empty manifest.
  BalancedBatchSampler(std::size_t real_count, std::size_t simulated_count, std::size_t batch_size,
                       std::uint64_t seed);

  Batch next();

  std::size_t batch_size() const noexcept { return 2 * half_; }

 private:
  void start_epoch();

  std::size_t real_count_;
  std::size_t simulated_count_;
  std::size_t half_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace glassasr
