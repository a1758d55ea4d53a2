#pragma once

// Affine transmission-time model T(s) = alpha + beta * s with per-message
// normal noise on both coefficients, and the derived speedup analysis.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace commcost {

/// alpha in seconds, beta in seconds per bit; alpha_m, beta_m are relative
/// noise levels (sigma_alpha = alpha_m * alpha_const, likewise for beta).
class TimeModelParams {
 public:
  /// Throws ParameterError on negative/non-finite inputs and DegenerateModelError
  /// when alpha_const + beta_const == 0.
  TimeModelParams(double alpha_const, double beta_const, double alpha_m = 0.0, double beta_m = 0.0);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double alpha_m() const noexcept { return alpha_m_; }
  double beta_m() const noexcept { return beta_m_; }
  double sigma_alpha() const noexcept { return alpha_m_ * alpha_; }
  double sigma_beta() const noexcept { return beta_m_ * beta_; }
  bool noiseless() const noexcept { return sigma_alpha() == 0.0 && sigma_beta() == 0.0; }

 private:
  double alpha_;
  double beta_;
  double alpha_m_;
  double beta_m_;
};

inline constexpr double kMinSampledTime = 1e-12;
inline constexpr double kDefaultDominance = 10.0;

enum class Region { area1_alpha_dominated, area2_mixed, area3_beta_dominated };

std::string_view to_string(Region r) noexcept;

/// alpha + beta * s
double expected_time(const TimeModelParams& params, double bits);

/// One noisy draw (alpha + da) + (beta + db) * s, clamped below at kMinSampledTime.
double sample_time(const TimeModelParams& params, double bits, std::uint64_t seed);

/// Real speedup T(s) / T(s / omega) on expected times.
double eta(const TimeModelParams& params, double bits, double omega);

/// area1 if beta*s <= alpha/rho, area3 if beta*s >= rho*alpha, area2 otherwise.
Region classify_region(const TimeModelParams& params, double bits, double rho = kDefaultDominance);

struct SpeedupRow {
  double omega;
  double compressed_bits;
  Region region_from;
  Region region_to;
  double expected_time;  // T(s / omega)
  double speedup;        // T(s) / T(s / omega)
};

struct SpeedupReport {
  double source_bits = 0.0;
  std::vector<SpeedupRow> rows;
};

SpeedupReport transition_report(const TimeModelParams& params, double bits_from, std::span<const double> omegas,
                                double rho = kDefaultDominance);

/// Same rows as transition_report over an ascending omega grid (throws if unsorted).
SpeedupReport speedup_curve(const TimeModelParams& params, double bits, std::span<const double> omega_grid,
                            double rho = kDefaultDominance);

/// `count` points geometrically spaced over [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t count);

/// Header `omega,compressed_bits,region_from,region_to,expected_time_s,speedup`.
void write_speedup_csv(std::ostream& out, const SpeedupReport& report);

}  // namespace commcost
