#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "glassasr/sampler.hpp"

using namespace glassasr;

namespace {

// Real draws grouped by the epoch they were made in.
std::map<std::size_t, std::vector<std::size_t>> draws_by_epoch(BalancedBatchSampler& s, std::size_t batches) {
  std::map<std::size_t, std::vector<std::size_t>> out;
  for (std::size_t k = 0; k < batches; ++k) {
    const Batch b = s.next();
    REQUIRE(b.real.size() == b.real_epoch.size());
    CHECK(b.epoch == b.real_epoch.front());
    for (std::size_t i = 0; i < b.real.size(); ++i) out[b.real_epoch[i]].push_back(b.real[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("every batch is exactly half real, half simulated") {
  BalancedBatchSampler s(37, 500, 16, 1);
  for (int i = 0; i < 1000; ++i) {
    const Batch b = s.next();
    CHECK(b.real.size() == 8);
    CHECK(b.simulated.size() == 8);
  }
}

TEST_CASE("each real record appears once per epoch") {
  BalancedBatchSampler s(100, 40, 10, 7);
  std::map<std::size_t, std::size_t> sim_counts;
  const int epochs = 1000;
  for (int e = 0; e < epochs; ++e) {
    std::vector<std::size_t> seen;
    for (std::size_t k = 0; k < 20; ++k) {
      const Batch b = s.next();
      CHECK(b.epoch == std::size_t(e));
      seen.insert(seen.end(), b.real.begin(), b.real.end());
      for (auto i : b.simulated) ++sim_counts[i];
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < 100; ++i) REQUIRE(seen[i] == i);
  }
  // Uniform draws with replacement: each count within 3 sigma of its mean.
  const double draws = 100.0 * epochs, p = 1.0 / 40.0;
  const double mean = draws * p, sigma = std::sqrt(draws * p * (1 - p));
  for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(double(sim_counts[i]) - mean) <= 3.0 * sigma);
}

TEST_CASE("a batch may span an epoch boundary") {
  BalancedBatchSampler s(10, 5, 8, 3);
  s.next();
  s.next();
  const Batch third = s.next();
  CHECK(third.real.size() == 4);
  CHECK(third.epoch == 0);
  CHECK(third.real_epoch == std::vector<std::size_t>{0, 0, 1, 1});
  CHECK(s.next().epoch == 1);

  BalancedBatchSampler t(37, 5, 16, 9);
  const auto epochs = draws_by_epoch(t, 100);  // 800 draws: 21 full epochs
  for (const auto& [e, items] : epochs) {
    if (items.size() < 37) continue;  // the epoch still in progress
    auto sorted = items;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 37; ++i) REQUIRE(sorted[i] == i);
  }
  CHECK(epochs.size() == 22);
}

TEST_CASE("sampler argument checks") {
  CHECK_THROWS_AS(BalancedBatchSampler(10, 10, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(BalancedBatchSampler(0, 10, 8, 1), std::invalid_argument);
  CHECK_THROWS_AS(BalancedBatchSampler(10, 0, 8, 1), std::invalid_argument);
}
