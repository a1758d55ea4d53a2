#include "commcost/commodel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

namespace commcost {

namespace {

void require_finite_nonneg(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) throw ParameterError(fmt::format("{} must be finite and >= 0, got {}", name, v));
}

}  // namespace

TimeModelParams::TimeModelParams(double alpha_const, double beta_const, double alpha_m, double beta_m)
    : alpha_(alpha_const), beta_(beta_const), alpha_m_(alpha_m), beta_m_(beta_m) {
  require_finite_nonneg(alpha_, "alpha");
  require_finite_nonneg(beta_, "beta");
  require_finite_nonneg(alpha_m_, "alpha_m");
  require_finite_nonneg(beta_m_, "beta_m");
  if (alpha_ + beta_ <= 0.0) throw DegenerateModelError("time model with alpha = beta = 0");
}

std::string_view to_string(Region r) noexcept {
  switch (r) {
    case Region::area1_alpha_dominated: return "area1_alpha_dominated";
    case Region::area2_mixed: return "area2_mixed";
    case Region::area3_beta_dominated: return "area3_beta_dominated";
  }
  return "unknown";
}

double expected_time(const TimeModelParams& params, double bits) {
  if (!(bits >= 0.0)) throw ParameterError("message size must be >= 0");
  return params.alpha() + params.beta() * bits;
}

double sample_time(const TimeModelParams& params, double bits, std::uint64_t seed) {
  if (!(bits >= 0.0)) throw ParameterError("message size must be >= 0");
  if (params.noiseless()) return std::max(expected_time(params, bits), kMinSampledTime);
  CounterRng rng(seed);
  const double da = params.sigma_alpha() * rng.normal();
  const double db = params.sigma_beta() * rng.normal();
  return std::max((params.alpha() + da) + (params.beta() + db) * bits, kMinSampledTime);
}

double eta(const TimeModelParams& params, double bits, double omega) {
  if (!(bits > 0.0)) throw ParameterError("eta needs a positive message size");
  if (!(omega >= 1.0)) throw ParameterError("eta needs omega >= 1");
  // pure bandwidth model: the ratio is omega, returned exactly
  if (params.alpha() == 0.0) return omega;
  return expected_time(params, bits) / expected_time(params, bits / omega);
}

Region classify_region(const TimeModelParams& params, double bits, double rho) {
  if (!(rho > 1.0)) throw ParameterError("dominance ratio rho must exceed 1");
  if (!(bits >= 0.0)) throw ParameterError("message size must be >= 0");
  const double size_term = params.beta() * bits;
  if (size_term <= params.alpha() / rho) return Region::area1_alpha_dominated;
  if (size_term >= rho * params.alpha()) return Region::area3_beta_dominated;
  return Region::area2_mixed;
}

SpeedupReport transition_report(const TimeModelParams& params, double bits_from, std::span<const double> omegas,
                                double rho) {
  if (!(bits_from > 0.0)) throw ParameterError("source message size must be positive");
  SpeedupReport report;
  report.source_bits = bits_from;
  report.rows.reserve(omegas.size());
  const Region from = classify_region(params, bits_from, rho);
  for (double omega : omegas) {
    const double to_bits = bits_from / omega;
    report.rows.push_back(SpeedupRow{omega, to_bits, from, classify_region(params, to_bits, rho),
                                     expected_time(params, to_bits), eta(params, bits_from, omega)});
  }
  return report;
}

SpeedupReport speedup_curve(const TimeModelParams& params, double bits, std::span<const double> omega_grid,
                            double rho) {
  if (!std::is_sorted(omega_grid.begin(), omega_grid.end()))
    throw ParameterError("omega grid must be sorted ascending");
  return transition_report(params, bits, omega_grid, rho);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ParameterError("geometric grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

void write_speedup_csv(std::ostream& out, const SpeedupReport& report) {
  out << "omega,compressed_bits,region_from,region_to,expected_time_s,speedup\n";
  for (const auto& row : report.rows) {
    fmt::print(out, "{},{},{},{},{},{}\n", row.omega, row.compressed_bits, to_string(row.region_from),
               to_string(row.region_to), row.expected_time, row.speedup);
  }
}

}  // namespace commcost
