#pragma once

// Synchronous parameter-server gradient descent, plain and with compressed
// uplink messages, run against simulated communication time.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "commcost/commodel.hpp"
#include "commcost/compression.hpp"

namespace commcost {

enum class ProblemKind { mean, quadratic };

/// f(x) = (1/n) sum_i f_i(x) with either f_i(x) = 1/2 ||x - a_i||^2 (mean) or
/// f_i(x) = 1/2 x^T A_i x - b_i^T x with symmetric PSD A_i (quadratic).
class Problem {
 public:
  static Problem mean(std::vector<Eigen::VectorXd> anchors);
  static Problem quadratic(std::vector<Eigen::MatrixXd> hessians, std::vector<Eigen::VectorXd> linear);

  /// anchors a_i with i.i.d. N(0, scale^2) entries
  static Problem random_mean(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0);
  /// A_i = B_i^T B_i / d + 0.1 I with Gaussian B_i, b_i ~ N(0, 1)
  static Problem random_quadratic(std::size_t n, std::size_t d, std::uint64_t seed);

  ProblemKind kind() const noexcept { return kind_; }
  std::size_t workers() const noexcept { return linear_.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(linear_.front().size()); }
  /// Largest eigenvalue of the averaged Hessian.
  double smoothness() const noexcept { return smoothness_; }
  /// Smallest eigenvalue of the averaged Hessian.
  double strong_convexity() const noexcept { return strong_convexity_; }

  double objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd worker_gradient(std::size_t i, const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// a_i for the mean problem, b_i for the quadratic one.
  const std::vector<Eigen::VectorXd>& anchors() const noexcept { return linear_; }
  /// A_i; empty for the mean problem.
  const std::vector<Eigen::MatrixXd>& hessians() const noexcept { return hessians_; }

 private:
  Problem() = default;
  void compute_spectrum();

  ProblemKind kind_ = ProblemKind::mean;
  std::vector<Eigen::MatrixXd> hessians_;  // empty for the mean problem
  std::vector<Eigen::VectorXd> linear_;    // a_i (mean) or b_i (quadratic)
  double smoothness_ = 1.0;
  double strong_convexity_ = 1.0;
};

struct Optimum {
  Eigen::VectorXd x;
  double value;
};

/// Exact minimizer: mean of the anchors, or the averaged linear system's solution.
Optimum closed_form_optimum(const Problem& problem);

struct SimConfig {
  std::uint64_t steps = 100;
  /// Constant stepsize; when unset and no schedule is given the default is
  /// 1/(L * zeta) for unbiased compressors and 1/L otherwise.
  std::optional<double> gamma;
  std::function<double(std::uint64_t)> schedule;
  CompressorSpec compressor;
  TimeModelParams time_model{1e-4, 1e-9};
  std::uint64_t seed = 0;
  bool downlink_compressed = false;
  /// When false the broadcast is free and wall clock counts uplinks only.
  bool charge_downlink = true;
  unsigned bits_per_scalar = kDefaultBitsPerScalar;
  std::optional<Eigen::VectorXd> x0;
};

double default_stepsize(const Problem& problem, const CompressorSpec& spec);

struct RoundRecord {
  std::uint64_t round;
  double objective;
  double grad_norm;
  double wall_clock_s;
  std::uint64_t uplink_bits;    // cumulative over all workers
  std::uint64_t downlink_bits;  // cumulative, one broadcast per round
  double uplink_time_s;         // cumulative max-over-workers uplink time
  double downlink_time_s;       // cumulative broadcast time (charged or not)
};

struct SimTrace {
  std::vector<RoundRecord> rounds;  // rounds[0] is the starting point
  Eigen::VectorXd final_x;

  const RoundRecord& last() const { return rounds.back(); }
};

inline constexpr double kDivergenceLimit = 1e12;

/// Plain distributed GD; config.compressor must be identity.
SimTrace run_gd(const Problem& problem, const SimConfig& config);

/// Uplink gradients pass through config.compressor; the server averages the
/// decompressed vectors.  Throws DivergenceError if f exceeds kDivergenceLimit.
SimTrace run_compressed_gd(const Problem& problem, const SimConfig& config);

/// Header `round,objective,grad_norm,wall_clock_s,uplink_bits,downlink_bits`.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

}  // namespace commcost
