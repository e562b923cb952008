#pragma once

#include <cstdint>
#include <future>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace tcone {

/** FNV-1a 64-bit hash. */
std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL);

/** Deterministic seed for a named job under a base seed. */
std::uint64_t derive_seed(std::uint64_t base, std::string_view job);

/** mt19937_64 with doubles built from the top 53 bits, so streams are identical across standard libraries. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/** %.12g text of a double; "inf", "-inf", "nan" for non-finite values. */
std::string fmt12(double v);

/** Runs f(i) for i in [0, n) on up to hardware_concurrency threads; results in index order. */
template <class F>
auto parallel_map(std::size_t n, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<R> out(n);
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

}  // namespace tcone
