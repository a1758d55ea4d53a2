#include "commcost/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "commcost/errors.hpp"

namespace commcost {

SelectionObjective SelectionObjective::from_fit(CompressorKind family, std::uint64_t d, std::uint64_t n, unsigned b,
                                                const FitResult& fit) {
  return SelectionObjective{family, d, n, b, std::max(0.0, fit.alpha_hat), std::max(0.0, fit.beta_hat)};
}

void SelectionObjective::validate() const {
  if (family != CompressorKind::rand_k && family != CompressorKind::top_k)
    throw ParameterError(fmt::format("power selection supports rand_k and top_k, not {}", to_string(family)));
  if (d == 0 || n == 0 || b == 0) throw ParameterError("d, n and b must be >= 1");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
    throw ParameterError("alpha and beta must be finite and >= 0");
}

double predicted_cost(const SelectionObjective& obj, std::uint64_t k) {
  obj.validate();
  if (k < 1 || k > obj.d) throw ParameterError(fmt::format("k = {} outside [1, d = {}]", k, obj.d));
  const double factor = static_cast<double>(obj.d) / static_cast<double>(k);
  if (obj.family == CompressorKind::rand_k) {
    const double bits = static_cast<double>(transmitted_bits(CompressorSpec::rand_k(k), obj.d, obj.b));
    return (1.0 + factor / std::sqrt(static_cast<double>(obj.n))) * (obj.alpha + obj.beta * bits);
  }
  const double bits = static_cast<double>(transmitted_bits(CompressorSpec::top_k(k), obj.d, obj.b));
  return (1.0 + factor) * (obj.alpha + obj.beta * bits);
}

std::vector<std::uint64_t> candidate_powers(std::uint64_t d) {
  std::vector<std::uint64_t> ks;
  if (d <= kExhaustiveScanLimit) {
    ks.resize(d);
    for (std::uint64_t k = 1; k <= d; ++k) ks[k - 1] = k;
    return ks;
  }
  const double ratio = std::log(static_cast<double>(d)) / static_cast<double>(kSubGridPoints - 1);
  for (std::size_t i = 0; i < kSubGridPoints; ++i) {
    auto k = static_cast<std::uint64_t>(std::llround(std::exp(ratio * static_cast<double>(i))));
    k = std::clamp<std::uint64_t>(k, 1, d);
    if (ks.empty() || ks.back() != k) ks.push_back(k);
  }
  if (ks.back() != d) ks.push_back(d);
  return ks;
}

Selection select_power(const SelectionObjective& obj) {
  obj.validate();
  Selection best{0, 0.0};
  for (auto k : candidate_powers(obj.d)) {
    const double j = predicted_cost(obj, k);
    if (best.k_star == 0 || j <= best.cost) best = {k, j};
  }
  return best;
}

AdaptiveController::AdaptiveController(SelectionObjective templ, double p_max, std::uint64_t refit_every,
                                       double forgetting)
    : templ_(templ), refit_every_(refit_every), state_(EstimatorState::empty(p_max, forgetting)) {
  templ_.validate();
  if (refit_every_ == 0) throw ParameterError("refit cadence must be >= 1");
}

std::optional<Decision> AdaptiveController::observe(double bits, double seconds) {
  ++seen_;
  state_.add(bits, seconds);
  if (seen_ % refit_every_ != 0) return std::nullopt;
  FitResult fit;
  try {
    fit = state_.fit();
  } catch (const DegenerateDesignError& e) {
    last_error_ = e.what();
    return std::nullopt;
  }
  last_error_.reset();
  last_fit_ = fit;
  const auto obj = SelectionObjective::from_fit(templ_.family, templ_.d, templ_.n, templ_.b, fit);
  const auto sel = select_power(obj);
  if (k_star_ && *k_star_ == sel.k_star) return std::nullopt;
  k_star_ = sel.k_star;
  Decision decision{seen_, fit.alpha_hat, fit.beta_hat, sel.k_star, sel.cost};
  decisions_.push_back(decision);
  return decision;
}

void write_decision_csv(std::ostream& out, const std::vector<Decision>& decisions) {
  out << "sample_index,alpha_hat,beta_hat,k_star,predicted_cost\n";
  for (const auto& d : decisions) {
    fmt::print(out, "{},{},{},{},{}\n", d.sample_index, d.alpha_hat, d.beta_hat, d.k_star, d.predicted_cost);
  }
}

void write_cost_curve_csv(std::ostream& out, const SelectionObjective& obj) {
  out << "k,predicted_cost\n";
  for (auto k : candidate_powers(obj.d)) fmt::print(out, "{},{}\n", k, predicted_cost(obj, k));
}

}  // namespace commcost
