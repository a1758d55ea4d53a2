#pragma once

// Choice of compression power k from the current (alpha, beta) estimate.
//
// Predicted time-to-solution, up to factors that do not depend on k:
//   unbiased family (rand_k): J(k) = (1 + zeta(k) / sqrt(n)) * T(s(k)),  zeta = d/k
//   biased family   (top_k):  J(k) = (1 + delta(k))          * T(s(k)),  delta = d/k
// where s(k) is the exact compressed message size and T(s) = alpha + beta s.
// This follows from cost ~ T(s_full) * (1/eta + zeta/(eta sqrt n)) with
// T(s_full)/eta = T(s_compressed).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "commcost/compression.hpp"
#include "commcost/estimator.hpp"

namespace commcost {

struct SelectionObjective {
  CompressorKind family = CompressorKind::rand_k;  // rand_k or top_k
  std::uint64_t d = 1;
  std::uint64_t n = 1;
  unsigned b = kDefaultBitsPerScalar;
  double alpha = 0.0;  // seconds
  double beta = 0.0;   // seconds per bit

  /// Negative estimates are clamped to zero.
  static SelectionObjective from_fit(CompressorKind family, std::uint64_t d, std::uint64_t n, unsigned b,
                                     const FitResult& fit);

  void validate() const;
};

/// Above this dimension select_power scans a 64-point geometric sub-grid.
inline constexpr std::uint64_t kExhaustiveScanLimit = 10'000'000;
inline constexpr std::size_t kSubGridPoints = 64;

double predicted_cost(const SelectionObjective& obj, std::uint64_t k);

struct Selection {
  std::uint64_t k_star;
  double cost;
};

/// argmin_k J(k); ties go to the larger k.
Selection select_power(const SelectionObjective& obj);

/// The k values select_power evaluates, ascending.
std::vector<std::uint64_t> candidate_powers(std::uint64_t d);

struct Decision {
  std::uint64_t sample_index;  // 1-based index of the sample that triggered it
  double alpha_hat;
  double beta_hat;
  std::uint64_t k_star;
  double predicted_cost;
};

/// Feeds (size, time) samples to an online estimator and re-selects k after
/// each refit.  Emits a Decision whenever k* changes.  Single owner.
class AdaptiveController {
 public:
  /// `templ` supplies family/d/n/b; its alpha/beta are replaced by the fit.
  AdaptiveController(SelectionObjective templ, double p_max, std::uint64_t refit_every = 1, double forgetting = 1.0);

  /// Returns a decision if k* changed.  A degenerate design (no two distinct
  /// sizes yet) is recorded in last_error() and the previous k* is kept.
  std::optional<Decision> observe(double bits, double seconds);

  std::optional<std::uint64_t> k_star() const noexcept { return k_star_; }
  const std::optional<FitResult>& last_fit() const noexcept { return last_fit_; }
  const std::optional<std::string>& last_error() const noexcept { return last_error_; }
  const std::vector<Decision>& decisions() const noexcept { return decisions_; }
  const EstimatorState& state() const noexcept { return state_; }

 private:
  SelectionObjective templ_;
  std::uint64_t refit_every_;
  EstimatorState state_;
  std::uint64_t seen_ = 0;
  std::optional<std::uint64_t> k_star_;
  std::optional<FitResult> last_fit_;
  std::optional<std::string> last_error_;
  std::vector<Decision> decisions_;
};

/// Header `sample_index,alpha_hat,beta_hat,k_star,predicted_cost`.
void write_decision_csv(std::ostream& out, const std::vector<Decision>& decisions);

/// Header `k,predicted_cost` over the candidate powers.
void write_cost_curve_csv(std::ostream& out, const SelectionObjective& obj);

}  // namespace commcost
