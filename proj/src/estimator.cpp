#include "commcost/estimator.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "commcost/csv.hpp"
#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

namespace commcost {

namespace {

void require_size(double x, double p_max) {
  if (!(x > 0.0) || !(x <= p_max)) throw ParameterError(fmt::format("message size {} outside (0, {}]", x, p_max));
}

void require_time(double y) {
  if (!std::isfinite(y)) throw ParameterError("observed time must be finite");
}

}  // namespace

SizePolicy parse_size_policy(std::string_view tag) {
  if (tag == "uniform") return SizePolicy::uniform;
  if (tag == "grid") return SizePolicy::grid;
  throw ParameterError(fmt::format("unknown size policy '{}'", tag));
}

EstimatorState::EstimatorState(double p_max, double forgetting) : p_max_(p_max), forgetting_(forgetting) {
  if (!(p_max_ > 0.0) || !std::isfinite(p_max_)) throw ParameterError("p_max must be positive and finite");
  if (!(forgetting_ > 0.0 && forgetting_ <= 1.0)) throw ParameterError("forgetting factor must lie in (0, 1]");
}

EstimatorState EstimatorState::empty(double p_max, double forgetting) { return EstimatorState(p_max, forgetting); }

EstimatorState EstimatorState::init(double x1, double y1, double x2, double y2, double p_max, double forgetting) {
  EstimatorState s(p_max, forgetting);
  require_size(x1, p_max);
  require_size(x2, p_max);
  if (x1 == x2) throw DegenerateDesignError("initial sizes coincide; the line is undetermined");
  require_time(y1);
  require_time(y2);
  s.add(x1, y1);
  s.add(x2, y2);
  return s;
}

void EstimatorState::add(double x, double y) {
  require_size(x, p_max_);
  require_time(y);
  const double xs = x * kSizeScale;
  if (forgetting_ != 1.0) {
    // discounting rescales the weight and the centered moments; the means stay put
    weight_ *= forgetting_;
    cxx_ *= forgetting_;
    cxy_ *= forgetting_;
  }
  ++count_;
  weight_ += 1.0;
  const double dx = xs - mx_;
  const double dy = y - my_;
  mx_ += dx / weight_;
  my_ += dy / weight_;
  cxx_ += dx * (xs - mx_);
  cxy_ += dx * (y - my_);
}

double EstimatorState::design_determinant() const noexcept {
  return weight_ * cxx_ / (kSizeScale * kSizeScale);
}

bool EstimatorState::can_fit() const noexcept {
  if (count_ < 2) return false;
  // same floor as on the raw normal equations: O(count * eps) relative to weight * s_xx
  const double sxx = cxx_ + weight_ * mx_ * mx_;
  return cxx_ > 4.0 * static_cast<double>(count_) * std::numeric_limits<double>::epsilon() * sxx;
}

FitResult EstimatorState::fit() const {
  if (!can_fit()) throw DegenerateDesignError("degenerate design: all message sizes are equal");
  const double beta_scaled = cxy_ / cxx_;
  return FitResult{my_ - beta_scaled * mx_, beta_scaled * kSizeScale, count_};
}

FitResult batch_ls(std::span<const Sample> points) {
  if (points.size() < 2) throw DegenerateDesignError("least squares needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.bits;
    my += p.seconds;
  }
  const auto n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  bool distinct = false;
  for (const auto& p : points) {
    const double dx = p.bits - mx;
    sxx += dx * dx;
    sxy += dx * (p.seconds - my);
    distinct = distinct || p.bits != points.front().bits;
  }
  if (!distinct || !(sxx > 0.0)) throw DegenerateDesignError("degenerate design: all message sizes are equal");
  const double beta = sxy / sxx;
  return FitResult{my - beta * mx, beta, points.size()};
}

std::vector<double> proposal_grid(double p_max) {
  if (!(p_max > 0.0)) throw ParameterError("p_max must be positive");
  std::vector<double> grid(kGridPoints);
  for (std::size_t i = 1; i <= kGridPoints; ++i) {
    const double exponent = -4.0 * static_cast<double>(kGridPoints - i) / static_cast<double>(kGridPoints);
    grid[i - 1] = p_max * std::pow(10.0, exponent);
  }
  grid.back() = p_max;
  return grid;
}

double propose_next_size(const EstimatorState& state, SizePolicy policy, std::uint64_t seed) {
  switch (policy) {
    case SizePolicy::uniform: {
      CounterRng rng(derive_key({seed, state.count()}));
      return state.p_max() * (1.0 - rng.uniform());
    }
    case SizePolicy::grid: return proposal_grid(state.p_max())[state.count() % kGridPoints];
  }
  throw ParameterError("unknown size policy");
}

std::vector<Sample> read_sample_csv(std::istream& in) {
  CsvTable table = read_csv(in);
  if (table.header.size() < 2 || table.header[0] != "size_bytes" || table.header[1] != "time_seconds")
    throw ParseError("sample CSV must start with header size_bytes,time_seconds");
  std::vector<Sample> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() < 2) throw ParseError(fmt::format("sample CSV row {} has fewer than two fields", i + 2));
    out.push_back(Sample{parse_double(row[0]) * 8.0, parse_double(row[1])});
  }
  return out;
}

void write_sample_csv(std::ostream& out, std::span<const Sample> samples, std::span<const std::uint64_t> reps) {
  out << "size_bytes,time_seconds,rep\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    fmt::print(out, "{},{},{}\n", samples[i].bits / 8.0, samples[i].seconds, i < reps.size() ? reps[i] : 0);
  }
}

void write_fit_trace_header(std::ostream& out) { out << "k,alpha_hat,beta_hat\n"; }

void write_fit_trace_row(std::ostream& out, const FitResult& fit) {
  fmt::print(out, "{},{},{}\n", fit.k, fit.alpha_hat, fit.beta_hat * 8.0);
}

}  // namespace commcost
