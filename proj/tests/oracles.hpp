#pragma once

// Test-only reference computations.  Nothing here calls into the library's
// implementation paths it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace oracle {

/// All k-subsets of {0..d-1} in lexicographic order.
inline std::vector<std::vector<std::uint64_t>> subsets(std::uint64_t d, std::uint64_t k) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> cur;
  std::function<void(std::uint64_t)> rec = [&](std::uint64_t start) {
    if (cur.size() == k) {
      out.push_back(cur);
      return;
    }
    for (std::uint64_t i = start; i < d; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

/// (d/k) * x restricted to S, written out directly from the operator's definition.
inline std::vector<double> rand_k_output(const std::vector<double>& x, const std::vector<std::uint64_t>& subset) {
  std::vector<double> y(x.size(), 0.0);
  const double scale = static_cast<double>(x.size()) / static_cast<double>(subset.size());
  for (auto i : subset) y[i] = scale * x[i];
  return y;
}

/// Least squares through the 2x2 normal equations in long double.
inline std::pair<double, double> normal_equations_fit(const std::vector<std::pair<double, double>>& pts) {
  long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    n += 1;
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
  }
  const long double det = n * sxx - sx * sx;
  const long double beta = (n * sxy - sx * sy) / det;
  const long double alpha = (sxx * sy - sx * sxy) / det;
  return {static_cast<double>(alpha), static_cast<double>(beta)};
}

/// argmin over k in [1, d]; ties go to the larger k.
inline std::uint64_t brute_argmin(std::uint64_t d, const std::function<double(std::uint64_t)>& cost) {
  std::uint64_t best = 1;
  double best_cost = cost(1);
  for (std::uint64_t k = 2; k <= d; ++k) {
    const double c = cost(k);
    if (c <= best_cost) {
      best = k;
      best_cost = c;
    }
  }
  return best;
}

/// Rand-k predicted cost written straight from the objective's definition.
inline double rand_k_cost(double alpha, double beta, double d, double n, double b, double k) {
  return (1.0 + (d / k) / std::sqrt(n)) * (alpha + beta * k * b);
}

/// Top-k predicted cost; index bits ceil(log2 d) computed by repeated doubling.
inline double top_k_cost(double alpha, double beta, std::uint64_t d, double b, double k) {
  unsigned index_bits = 0;
  while ((std::uint64_t{1} << index_bits) < d) ++index_bits;
  return (1.0 + static_cast<double>(d) / k) * (alpha + beta * (k * b + k * index_bits));
}

}  // namespace oracle
