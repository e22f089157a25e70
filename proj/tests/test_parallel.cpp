#include <stdexcept>

#include <gtest/gtest.h>

#include "slicing/parallel.hpp"

namespace slicing {
namespace {

TEST(ChunkPlan, TrialsAddUp) {
  const ChunkPlan plan{1, 1000, 64};
  std::uint64_t total = 0;
  for (std::uint32_t c = 0; c < plan.chunks; ++c) total += plan.chunk_trials(c);
  EXPECT_EQ(total, 1000u);
  EXPECT_EQ(ChunkPlan({1, 10, 64}).chunk_trials(63), 0u);
}

TEST(Kernels, SerialAndParallelAreBitwiseEqual) {
  const ChunkPlan plan{42, 100003, 64};
  auto sample = [](Rng& r) { return std::normal_distribution<double>()(r); };
  const Moments s = accumulate(plan, sample, Exec::serial);
  const Moments p = accumulate(plan, sample, Exec::parallel);
  EXPECT_EQ(s.sum, p.sum);
  EXPECT_EQ(s.sum_sq, p.sum_sq);
  EXPECT_EQ(s.count, 100003u);

  auto trial = [](Rng& r) { return std::uniform_real_distribution<double>()(r) < 0.3; };
  EXPECT_EQ(count_hits(plan, trial, Exec::serial), count_hits(plan, trial, Exec::parallel));

  const auto a = map_indices(100, [](std::size_t i) { return i * i; }, Exec::serial);
  const auto b = map_indices(100, [](std::size_t i) { return i * i; }, Exec::parallel);
  EXPECT_EQ(a, b);
}

TEST(Kernels, MomentsAreCorrect) {
  const Moments m = accumulate(ChunkPlan{7, 200000, 64}, [](Rng& r) {
    return std::uniform_real_distribution<double>()(r);
  });
  EXPECT_NEAR(m.mean(), 0.5, 4 * m.std_error());
  EXPECT_NEAR(m.variance(), 1.0 / 12.0, 2e-3);
}

TEST(Kernels, LowestIndexExceptionIsRethrown) {
  try {
    (void)map_indices(
        50,
        [](std::size_t i) -> int {
          if (i == 17 || i == 31) throw std::runtime_error("at " + std::to_string(i));
          return 0;
        },
        Exec::parallel);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "at 17");
  }
}

TEST(Seeds, DerivedStreamsAreStableAndDistinct) {
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
  Rng a = make_rng(9, 4);
  Rng b = make_rng(9, 4);
  EXPECT_EQ(a(), b());
}

}  // namespace
}  // namespace slicing
