#include "sobotrace/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <numbers>
#include <thread>

namespace sobotrace {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("SOBOTRACE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& threads_slot() {
  static std::atomic<int> n{initial_threads()};
  return n;
}

std::mutex& warn_mutex() {
  static std::mutex m;
  return m;
}

std::vector<std::string>& warn_log() {
  static std::vector<std::string> log;
  return log;
}

}  // namespace

int thread_count() { return threads_slot().load(); }

void set_thread_count(int n) {
  require(n >= 1, "thread count must be >= 1");
  threads_slot().store(n);
}

void parallel_chunks(std::size_t n,
                     const std::function<void(int, std::size_t, std::size_t)>& body) {
  const int workers = static_cast<int>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1)));
  auto bounds = [&](int c) { return n * static_cast<std::size_t>(c) / workers; };
  if (workers <= 1) {
    body(0, 0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int c = 0; c < workers; ++c) {
    pool.emplace_back([&, c] {
      try {
        body(c, bounds(c), bounds(c + 1));
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
  std::vector<double> partial(std::max(thread_count(), 1), 0.0);
  parallel_chunks(n, [&](int c, std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = b; i < e; ++i) acc += term(i);
    partial[c] = acc;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(warn_mutex());
  warn_log().push_back(msg);
  std::cerr << "sobotrace warning: " << msg << '\n';
}

std::vector<std::string> take_warnings() {
  std::lock_guard<std::mutex> lock(warn_mutex());
  std::vector<std::string> out;
  out.swap(warn_log());
  return out;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sobotrace
