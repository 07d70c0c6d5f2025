// Small shared utilities: counter-based RNG streams, seed derivation,
// a bounded parallel-for, and little-endian binary I/O helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

namespace licors {

// SplitMix64. All randomness in the library flows through derived streams of
// this generator so that results are reproducible and independent of thread
// count. Never share one engine across threads; derive a stream per task.
struct SplitMix64 {
  uint64_t state;
  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in the open interval (0, 1).
  double uniform01() { return (next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

  // Standard normal via Box-Muller; avoids log(0) because uniform01() > 0.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925287 * u2);
  }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    // 53-bit multiply avoids modulo bias for the small n used here.
    return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n;
  }
};

// Derives an independent stream key from a base seed and a stream index.
inline uint64_t mix_seed(uint64_t base, uint64_t stream) {
  SplitMix64 g(base ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  g.next();
  return g.next();
}

inline uint64_t mix_seed(uint64_t base, uint64_t s1, uint64_t s2) {
  return mix_seed(mix_seed(base, s1), s2);
}

inline uint64_t double_bits(double x) {
  uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  return b;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks, one per
// worker, so callers that write into preallocated slot i get deterministic
// output regardless of the thread count.
inline void parallel_for(int64_t n, int threads,
                         const std::function<void(int64_t)>& fn) {
  threads = resolve_threads(threads);
  if (n <= 0) return;
  if (threads == 1 || n < 2) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<int64_t>(threads, n));
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t lo = w * chunk;
    int64_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Little-endian binary I/O. Written byte by byte so files are portable
// across hosts regardless of native byte order.
inline void write_u32le(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64le(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64le(std::ostream& os, double x) {
  write_u64le(os, double_bits(x));
}

inline uint32_t read_u32le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline uint64_t read_u64le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double read_f64le(std::istream& is) {
  uint64_t b = read_u64le(is);
  double x;
  std::memcpy(&x, &b, sizeof x);
  return x;
}

}  // namespace licors
