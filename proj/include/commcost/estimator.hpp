#pragma once

// Online least-squares fit of T(s) = alpha + beta * s from streamed
// (size, time) observations.  Constant memory: weight, two means and two
// centered moments, from which the four raw sums are recoverable.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace commcost {

struct FitResult {
  double alpha_hat = 0.0;  // seconds
  double beta_hat = 0.0;   // seconds per bit
  std::uint64_t k = 0;     // samples ingested
};

struct Sample {
  double bits;
  double seconds;
};

enum class SizePolicy { uniform, grid };

SizePolicy parse_size_policy(std::string_view tag);

inline constexpr std::size_t kGridPoints = 16;

class EstimatorState {
 public:
  /// Seeds the sums from two observations at distinct sizes in (0, p_max].
  /// `forgetting` in (0, 1] discounts all sums before each later update; 1 keeps every sample.
  static EstimatorState init(double x1, double y1, double x2, double y2, double p_max, double forgetting = 1.0);

  /// State with no samples yet; fit() is unavailable until two distinct sizes arrive.
  static EstimatorState empty(double p_max, double forgetting = 1.0);

  /// Accumulate one sample without fitting.
  void add(double x, double y);

  /// Least-squares coefficients from the current sums.
  /// Throws DegenerateDesignError while k * s_xx - s_x^2 is not positive.
  FitResult fit() const;

  /// add() then fit().  The sample is kept even if the fit throws.
  FitResult update(double x, double y) {
    add(x, y);
    return fit();
  }

  bool can_fit() const noexcept;

  std::uint64_t count() const noexcept { return count_; }
  /// Effective sample weight; equals count() when forgetting == 1.
  double weight() const noexcept { return weight_; }
  double p_max() const noexcept { return p_max_; }
  double forgetting() const noexcept { return forgetting_; }

  // Raw sums in caller units (bits, seconds), rebuilt from the moments.
  double s_x() const noexcept { return weight_ * mx_ / kSizeScale; }
  double s_y() const noexcept { return weight_ * my_; }
  double s_xy() const noexcept { return (cxy_ + weight_ * mx_ * my_) / kSizeScale; }
  double s_xx() const noexcept { return (cxx_ + weight_ * mx_ * mx_) / (kSizeScale * kSizeScale); }

  /// k * s_xx - s_x^2 in caller units; >= 0 up to rounding.
  double design_determinant() const noexcept;

  /// Sizes are accumulated in units of 2^20 bits.  The power of two keeps the
  /// rescale exact while holding s_xx far from overflow.
  static constexpr double kSizeScale = 1.0 / 1048576.0;

 private:
  EstimatorState(double p_max, double forgetting);

  double p_max_;
  double forgetting_;
  std::uint64_t count_ = 0;
  double weight_ = 0.0;
  // Welford-style centered accumulators; avoids the cancellation in
  // weight * s_xx - s_x^2 when sizes are large relative to their spread.
  double mx_ = 0.0;
  double my_ = 0.0;
  double cxx_ = 0.0;
  double cxy_ = 0.0;
};

/// Ordinary least squares on stored points (centered two-pass form).
FitResult batch_ls(std::span<const Sample> points);

/// Next probe size in bits.  `uniform`: uniform on (0, p_max].  `grid`: the
/// (count mod 16)-th point of a geometric grid over (p_max / 1e4, p_max].
double propose_next_size(const EstimatorState& state, SizePolicy policy, std::uint64_t seed);

/// The 16-point proposal grid for a given p_max, ascending.
std::vector<double> proposal_grid(double p_max);

/// Reads a `size_bytes,time_seconds[,...]` CSV; sizes come back in bits.
std::vector<Sample> read_sample_csv(std::istream& in);

/// Writes `size_bytes,time_seconds,rep` rows (bits converted back to bytes).
void write_sample_csv(std::ostream& out, std::span<const Sample> samples, std::span<const std::uint64_t> reps = {});

void write_fit_trace_header(std::ostream& out);
/// One `k,alpha_hat,beta_hat` row with beta expressed per byte.
void write_fit_trace_row(std::ostream& out, const FitResult& fit);

}  // namespace commcost
