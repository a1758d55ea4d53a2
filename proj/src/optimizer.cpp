#include "commcost/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

namespace commcost {

namespace {

// channel tags folded into the per-message keys
constexpr std::uint64_t kDownlinkCompress = 0;
constexpr std::uint64_t kDownlinkTime = 1;
constexpr std::uint64_t kUplinkCompress = 2;
constexpr std::uint64_t kUplinkTime = 3;

Eigen::VectorXd to_eigen(const DenseVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.values().data(), static_cast<Eigen::Index>(v.size()));
}

DenseVector to_dense(const Eigen::VectorXd& v, unsigned b) {
  return DenseVector(std::vector<double>(v.data(), v.data() + v.size()), b);
}

void check_finite_objective(double f, std::uint64_t round) {
  if (!std::isfinite(f) || f > kDivergenceLimit)
    throw DivergenceError(fmt::format("objective {} exceeded {} at round {}; reduce the stepsize", f,
                                      kDivergenceLimit, round));
}

}  // namespace

Problem Problem::mean(std::vector<Eigen::VectorXd> anchors) {
  if (anchors.empty()) throw ParameterError("problem needs at least one worker");
  const auto d = anchors.front().size();
  if (d == 0) throw ParameterError("problem dimension must be >= 1");
  for (const auto& a : anchors)
    if (a.size() != d) throw ParameterError("anchor dimensions differ");
  Problem p;
  p.kind_ = ProblemKind::mean;
  p.linear_ = std::move(anchors);
  p.smoothness_ = 1.0;
  p.strong_convexity_ = 1.0;
  return p;
}

Problem Problem::quadratic(std::vector<Eigen::MatrixXd> hessians, std::vector<Eigen::VectorXd> linear) {
  if (hessians.empty() || hessians.size() != linear.size())
    throw ParameterError("quadratic problem needs one (A_i, b_i) pair per worker");
  const auto d = linear.front().size();
  if (d == 0) throw ParameterError("problem dimension must be >= 1");
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    if (hessians[i].rows() != d || hessians[i].cols() != d || linear[i].size() != d)
      throw ParameterError("quadratic problem has inconsistent shapes");
    if (!hessians[i].isApprox(hessians[i].transpose(), 1e-12)) throw ParameterError("A_i must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessians[i], Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff()))
      throw ParameterError("A_i must be positive semidefinite");
  }
  Problem p;
  p.kind_ = ProblemKind::quadratic;
  p.hessians_ = std::move(hessians);
  p.linear_ = std::move(linear);
  p.compute_spectrum();
  return p;
}

Problem Problem::random_mean(std::size_t n, std::size_t d, std::uint64_t seed, double scale) {
  if (n == 0 || d == 0) throw ParameterError("n and d must be >= 1");
  std::vector<Eigen::VectorXd> anchors;
  anchors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_key({seed, 0xa11c40, i}));
    Eigen::VectorXd a(static_cast<Eigen::Index>(d));
    for (auto& v : a) v = scale * rng.normal();
    anchors.push_back(std::move(a));
  }
  return mean(std::move(anchors));
}

Problem Problem::random_quadratic(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n == 0 || d == 0) throw ParameterError("n and d must be >= 1");
  std::vector<Eigen::MatrixXd> hessians;
  std::vector<Eigen::VectorXd> linear;
  const auto di = static_cast<Eigen::Index>(d);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_key({seed, 0x9fad, i}));
    Eigen::MatrixXd b(di, di);
    for (auto& v : b.reshaped()) v = rng.normal();
    Eigen::MatrixXd a = b.transpose() * b / static_cast<double>(d);
    a.diagonal().array() += 0.1;
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::VectorXd lin(di);
    for (auto& v : lin) v = rng.normal();
    hessians.push_back(std::move(a));
    linear.push_back(std::move(lin));
  }
  return quadratic(std::move(hessians), std::move(linear));
}

void Problem::compute_spectrum() {
  Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(hessians_.front().rows(), hessians_.front().cols());
  for (const auto& a : hessians_) avg += a;
  avg /= static_cast<double>(hessians_.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(avg, Eigen::EigenvaluesOnly);
  smoothness_ = eig.eigenvalues().maxCoeff();
  strong_convexity_ = std::max(0.0, eig.eigenvalues().minCoeff());
}

double Problem::objective(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < workers(); ++i) {
    if (kind_ == ProblemKind::mean) {
      total += 0.5 * (x - linear_[i]).squaredNorm();
    } else {
      total += 0.5 * x.dot(hessians_[i] * x) - linear_[i].dot(x);
    }
  }
  return total / static_cast<double>(workers());
}

Eigen::VectorXd Problem::worker_gradient(std::size_t i, const Eigen::VectorXd& x) const {
  if (kind_ == ProblemKind::mean) return x - linear_[i];
  return hessians_[i] * x - linear_[i];
}

Eigen::VectorXd Problem::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < workers(); ++i) g += worker_gradient(i, x);
  return g / static_cast<double>(workers());
}

Optimum closed_form_optimum(const Problem& problem) {
  const auto d = static_cast<Eigen::Index>(problem.dim());
  const auto n = static_cast<double>(problem.workers());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (problem.kind() == ProblemKind::mean) {
    for (const auto& a : problem.anchors()) x += a;
    x /= n;
  } else {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i < problem.workers(); ++i) {
      avg += problem.hessians()[i];
      rhs += problem.anchors()[i];
    }
    avg /= n;
    rhs /= n;
    if (!(problem.strong_convexity() > 1e-12 * std::max(1.0, problem.smoothness())))
      throw ParameterError("averaged Hessian is singular; the minimizer is not unique");
    x = avg.ldlt().solve(rhs);
  }
  return Optimum{x, problem.objective(x)};
}

double default_stepsize(const Problem& problem, const CompressorSpec& spec) {
  const double l = problem.smoothness();
  if (spec.unbiased()) {
    const auto zeta = spec.variance_factor(problem.dim());
    return 1.0 / (l * zeta->value());
  }
  return 1.0 / l;
}

SimTrace run_gd(const Problem& problem, const SimConfig& config) {
  if (config.compressor.kind != CompressorKind::identity)
    throw ParameterError("run_gd is the uncompressed method; use run_compressed_gd");
  return run_compressed_gd(problem, config);
}

SimTrace run_compressed_gd(const Problem& problem, const SimConfig& config) {
  if (config.steps < 1) throw ParameterError("steps must be >= 1");
  const std::size_t n = problem.workers();
  const std::uint64_t d = problem.dim();
  const unsigned b = config.bits_per_scalar;
  config.compressor.validate(d);

  const double fallback_gamma = config.gamma.value_or(default_stepsize(problem, config.compressor));
  auto stepsize = [&](std::uint64_t k) {
    const double g = config.schedule ? config.schedule(k) : fallback_gamma;
    if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError(fmt::format("stepsize at round {} must be > 0", k));
    return g;
  };

  Eigen::VectorXd x = config.x0.value_or(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)));
  if (static_cast<std::uint64_t>(x.size()) != d) throw ParameterError("x0 has the wrong dimension");

  SimTrace trace;
  trace.rounds.reserve(config.steps + 1);
  {
    const double f0 = problem.objective(x);
    check_finite_objective(f0, 0);
    trace.rounds.push_back(RoundRecord{0, f0, problem.gradient(x).norm(), 0.0, 0, 0, 0.0, 0.0});
  }

  const auto server = static_cast<std::uint64_t>(n);
  Eigen::VectorXd aggregate(static_cast<Eigen::Index>(d));
  for (std::uint64_t k = 0; k < config.steps; ++k) {
    RoundRecord rec = trace.rounds.back();
    rec.round = k + 1;

    // broadcast x^k
    Eigen::VectorXd worker_point = x;
    std::uint64_t down_bits = d * b;
    if (config.downlink_compressed) {
      const auto msg =
          compress(to_dense(x, b), config.compressor, derive_key({config.seed, k, server, kDownlinkCompress}));
      down_bits = msg.bits;
      worker_point = to_eigen(decompress(msg));
    }
    const double t_down =
        sample_time(config.time_model, static_cast<double>(down_bits), derive_key({config.seed, k, server, kDownlinkTime}));

    // local gradients, compressed uplink
    aggregate.setZero();
    double t_up = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto msg = compress(to_dense(problem.worker_gradient(i, worker_point), b), config.compressor,
                                derive_key({config.seed, k, i, kUplinkCompress}));
      aggregate += to_eigen(decompress(msg));
      rec.uplink_bits += msg.bits;
      t_up = std::max(t_up, sample_time(config.time_model, static_cast<double>(msg.bits),
                                        derive_key({config.seed, k, i, kUplinkTime})));
    }

    // server step
    x -= stepsize(k) * (aggregate / static_cast<double>(n));

    rec.objective = problem.objective(x);
    check_finite_objective(rec.objective, rec.round);
    rec.grad_norm = problem.gradient(x).norm();
    rec.downlink_bits += down_bits;
    rec.uplink_time_s += t_up;
    rec.downlink_time_s += t_down;
    rec.wall_clock_s += t_up + (config.charge_downlink ? t_down : 0.0);
    trace.rounds.push_back(rec);
  }
  trace.final_x = std::move(x);
  return trace;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "round,objective,grad_norm,wall_clock_s,uplink_bits,downlink_bits\n";
  for (const auto& r : trace.rounds) {
    fmt::print(out, "{},{},{},{},{},{}\n", r.round, r.objective, r.grad_norm, r.wall_clock_s, r.uplink_bits,
               r.downlink_bits);
  }
}

}  // namespace commcost
