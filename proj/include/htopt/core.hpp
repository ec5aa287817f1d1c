#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace htopt {

using Vec = std::vector<double>;

inline Vec zeros(std::size_t d) { return Vec(d, 0.0); }
inline Vec ones(std::size_t d) { return Vec(d, 1.0); }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm1(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double norm2_sq(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm2(const Vec& v) { return std::sqrt(norm2_sq(v)); }

inline double norm_inf(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

inline double norm_p(const Vec& v, double p) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

// Squared weighted norm sum_i w_i * v_i^2.
inline double weighted_norm_sq(const Vec& v, const Vec& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i] * v[i];
  return s;
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Compensated (Kahan) accumulator for long prefix scans.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct MeanStats {
  double mean = 0.0;
  double se = 0.0;    // standard error of the mean
  double ci95 = 0.0;  // 1.96 * se
  std::size_t n = 0;
};

inline MeanStats mean_stats(std::span<const double> xs) {
  MeanStats st;
  st.n = xs.size();
  if (st.n == 0) return st;
  bool all_equal = true;
  for (double x : xs) all_equal = all_equal && x == xs[0];
  if (all_equal) {  // identical samples: zero spread, exactly
    st.mean = xs[0];
    return st;
  }
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(st.n);
  st.mean = m;
  if (st.n >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double var = ss / static_cast<double>(st.n - 1);
    st.se = std::sqrt(var / static_cast<double>(st.n));
  }
  st.ci95 = 1.96 * st.se;
  return st;
}

// Normal-approximation 95% half-width for a binomial proportion.
inline double binomial_ci95(double p_hat, std::size_t n) {
  if (n == 0) return 0.0;
  return 1.96 * std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / static_cast<double>(n));
}

// Runs body(i) for i in [0, n).  Each index owns its output slot, so the
// schedule cannot change results.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (n <= 1 || hw <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::scoped_lock lk(error_mu);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace htopt
