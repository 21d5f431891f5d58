#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace perslab {

/// Seed, worker count and job id of one Monte Carlo run.
struct McOptions {
  std::uint64_t seed = 20240601;
  unsigned shards = 1;
  std::uint64_t job = 0;
};

/// Calls body(i) for i in [0, count). Worker s takes i = s, s + shards, ...
/// Bodies must only write to slot i of caller-owned storage, so the result
/// does not depend on the shard count.
template <class Body>
void for_each_index(std::size_t count, unsigned shards, Body&& body) {
  if (shards <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(shards);
  for (unsigned s = 0; s < shards; ++s) {
    workers.emplace_back([&, s] {
      try {
        for (std::size_t i = s; i < count; i += shards) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

/// Evaluates f(i) for every index and returns the results in index order.
template <class T, class F>
std::vector<T> map_indices(std::size_t count, unsigned shards, F&& f) {
  std::vector<T> out(count);
  for_each_index(count, shards, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

/// Stable job id for a (kind, parameter) pair.
inline std::uint64_t job_id(std::uint64_t kind, std::uint64_t param, std::uint64_t base = 0) {
  return base * 0x100000001b3ull ^ (kind << 40) ^ param;
}

}  // namespace perslab
