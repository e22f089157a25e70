#pragma once

// Data-parallel Monte Carlo and map kernels.
//
// Every kernel splits its work into a fixed number of chunks, each with its own
// generator stream derived from the plan seed. Chunk results are merged in chunk
// order, so the OpenMP path and the serial reference path return bitwise
// identical results for any thread count.

#include <cmath>
#include <cstdint>
#include <exception>
#include <type_traits>
#include <vector>

#include "slicing/random.hpp"

namespace slicing {

enum class Exec { serial, parallel };

struct ChunkPlan {
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::uint32_t chunks = 64;

  std::uint64_t chunk_trials(std::uint32_t c) const {
    const std::uint64_t base = trials / chunks;
    return base + (c < trials % chunks ? 1 : 0);
  }
};

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double variance() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double v = (sum_sq - static_cast<double>(count) * m * m) / static_cast<double>(count - 1);
    return v > 0.0 ? v : 0.0;
  }
  double std_error() const {
    return count ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

namespace detail {

// Runs body(c) for c in [0, count). Exceptions are captured per index and the
// lowest-index one is rethrown after the loop.
template <class Body>
void for_each_index(std::size_t count, Body&& body, Exec exec) {
  std::vector<std::exception_ptr> errors(count);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(count); ++c) {
      try {
        body(static_cast<std::size_t>(c));
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  } else {
    for (std::size_t c = 0; c < count; ++c) {
      try {
        body(c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Number of trials for which trial(rng) returned true.
template <class Trial>
std::uint64_t count_hits(const ChunkPlan& plan, Trial&& trial, Exec exec = Exec::parallel) {
  std::vector<std::uint64_t> hits(plan.chunks, 0);
  detail::for_each_index(
      plan.chunks,
      [&](std::size_t c) {
        Rng rng = make_rng(plan.seed, c);
        const auto n = plan.chunk_trials(static_cast<std::uint32_t>(c));
        std::uint64_t h = 0;
        for (std::uint64_t t = 0; t < n; ++t) h += trial(rng) ? 1 : 0;
        hits[c] = h;
      },
      exec);
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

// Sum and sum of squares of sample(rng) over all trials.
template <class Sample>
Moments accumulate(const ChunkPlan& plan, Sample&& sample, Exec exec = Exec::parallel) {
  std::vector<Moments> parts(plan.chunks);
  detail::for_each_index(
      plan.chunks,
      [&](std::size_t c) {
        Rng rng = make_rng(plan.seed, c);
        const auto n = plan.chunk_trials(static_cast<std::uint32_t>(c));
        Moments m;
        for (std::uint64_t t = 0; t < n; ++t) {
          const double v = sample(rng);
          m.sum += v;
          m.sum_sq += v * v;
        }
        m.count = n;
        parts[c] = m;
      },
      exec);
  Moments total;
  for (const auto& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.count += m.count;
  }
  return total;
}

// out[i] = fn(i) for i in [0, count).
template <class Fn>
auto map_indices(std::size_t count, Fn&& fn, Exec exec = Exec::parallel)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out(count);
  detail::for_each_index(count, [&](std::size_t i) { out[i] = fn(i); }, exec);
  return out;
}

}  // namespace slicing
