#pragma once
/// Shared error types, deterministic parallel loops and a portable random stream.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobotrace {

/// Precondition or schema violation. Maps to CLI exit status 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-convergence, singular system). Maps to CLI exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgument(msg);
}

/// Worker count used by data-parallel loops. Initialized from SOBOTRACE_THREADS,
/// falling back to the hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs body(chunk, begin, end) over [0, n) split into thread_count() contiguous
/// chunks. Chunk boundaries depend only on n and the thread count.
void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& body);

/// Deterministic parallel sum of term(i) for i in [0, n): per-chunk partials are
/// combined in chunk order.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term);

/// Emit a warning on stderr (prefixed). Captured copies are kept for tests.
void warn(const std::string& msg);
std::vector<std::string> take_warnings();

/// Seeded random stream with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(uniform() * (hi - lo + 1));
  }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace sobotrace
