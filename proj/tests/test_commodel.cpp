#include <doctest.h>

#include <cmath>
#include <sstream>

#include "commcost/commodel.hpp"
#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

using namespace commcost;

TEST_CASE("expected_time") {
  CHECK(expected_time(TimeModelParams(0, 2e-9), 1e9) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(expected_time(TimeModelParams(1e-3, 0), 12345) == 1e-3);
  CHECK(expected_time(TimeModelParams(1, 1), 100) == 101);
  CHECK_THROWS_AS(expected_time(TimeModelParams(1, 1), -1), ParameterError);
}

TEST_CASE("time model rejects degenerate or negative parameters") {
  CHECK_THROWS_AS(TimeModelParams(0, 0), DegenerateModelError);
  CHECK_THROWS_AS(TimeModelParams(-1, 1), ParameterError);
  CHECK_THROWS_AS(TimeModelParams(1, 1, -0.1, 0), ParameterError);
  CHECK_THROWS_AS(TimeModelParams(1, NAN), ParameterError);
  const TimeModelParams p(2, 3, 0.1, 0.5);
  CHECK(p.sigma_alpha() == doctest::Approx(0.2));
  CHECK(p.sigma_beta() == doctest::Approx(1.5));
}

TEST_CASE("sample_time without noise is the expected time") {
  const TimeModelParams p(1e-4, 1e-9);
  for (double s : {0.0, 1.0, 1e6, 1e12}) CHECK(sample_time(p, s, 42) == expected_time(p, s));
}

TEST_CASE("sample_time mean and variance follow the normal-noise model") {
  const TimeModelParams p(1e-3, 1e-9, 0.2, 0.3);
  const double s = 4e5;
  const int draws = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double t = sample_time(p, s, derive_key({99, std::uint64_t(i)}));
    sum += t;
    sumsq += t * t;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  const double model_var = p.sigma_alpha() * p.sigma_alpha() + s * s * p.sigma_beta() * p.sigma_beta();
  CHECK(std::abs(mean - expected_time(p, s)) < 3 * std::sqrt(model_var / draws));
  CHECK(std::abs(var / model_var - 1.0) < 0.05);
}

TEST_CASE("sample_time is clamped below") {
  const TimeModelParams p(1e-6, 0, 50.0, 0);  // sigma 50x the mean: many negative draws
  for (std::uint64_t i = 0; i < 1000; ++i) CHECK(sample_time(p, 10, i) >= kMinSampledTime);
}

TEST_CASE("eta closed forms") {
  CHECK(eta(TimeModelParams(0, 3e-9), 1e6, 17.5) == 17.5);
  CHECK(eta(TimeModelParams(2e-3, 0), 1e6, 1000) == 1.0);
  CHECK(eta(TimeModelParams(1, 1), 100, 100) == doctest::Approx(50.5).epsilon(1e-15));
  CHECK(eta(TimeModelParams(1, 1), 100, 1) == 1.0);
  CHECK_THROWS_AS(eta(TimeModelParams(1, 1), 0, 2), ParameterError);
  CHECK_THROWS_AS(eta(TimeModelParams(1, 1), 10, 0.5), ParameterError);
}

TEST_CASE("eta bounds and monotonicity on random draws") {
  CounterRng rng(derive_key({2024}));
  for (int i = 0; i < 10000; ++i) {
    const double alpha = std::exp(std::log(1e-7) + rng.uniform() * std::log(1e5));
    const double beta = std::exp(std::log(1e-12) + rng.uniform() * std::log(1e4));
    const double s = std::exp(rng.uniform() * std::log(1e10));
    const double omega = std::exp(rng.uniform() * std::log(1e6));
    const TimeModelParams p(alpha, beta);
    const double e = eta(p, s, omega);
    CHECK(e >= 1.0);
    CHECK(e <= omega * (1 + 1e-12));
    CHECK(e <= (1.0 + beta * s / alpha) * (1 + 1e-12));
    CHECK(eta(p, s, omega * 1.5) >= e);
    CHECK(eta(TimeModelParams(alpha * 2, beta), s, omega) <= e * (1 + 1e-12));
  }
}

TEST_CASE("classify_region decision rule") {
  CHECK(classify_region(TimeModelParams(1e-3, 1e-9), 1e3) == Region::area1_alpha_dominated);
  // beta * s == alpha exactly
  CHECK(classify_region(TimeModelParams(0.5, 0.25), 2.0) == Region::area2_mixed);
  CHECK(classify_region(TimeModelParams(0, 1e-9), 1.0) == Region::area3_beta_dominated);
  CHECK(classify_region(TimeModelParams(1, 1), 0.1, 10) == Region::area1_alpha_dominated);  // boundary: beta s = alpha/rho
  CHECK(classify_region(TimeModelParams(1, 1), 10, 10) == Region::area3_beta_dominated);   // boundary: beta s = rho alpha
  CHECK_THROWS_AS(classify_region(TimeModelParams(1, 1), 1, 1.0), ParameterError);
}

TEST_CASE("classify_region is monotone in message size") {
  CounterRng rng(derive_key({3}));
  for (int t = 0; t < 200; ++t) {
    const TimeModelParams p(rng.uniform() * 1e-3, rng.uniform() * 1e-8 + 1e-12);
    const double rho = 1.5 + rng.uniform() * 50;
    int prev = 0;
    for (double s = 1; s < 1e12; s *= 1.7) {
      const int area = static_cast<int>(classify_region(p, s, rho));
      CHECK(area >= prev);
      prev = area;
    }
  }
}

TEST_CASE("transition report") {
  const TimeModelParams p(1e-4, 1e-9);
  const std::vector<double> omegas{1.0, 10.0, 1e3, 1e9};
  const auto rep = transition_report(p, 1e8, omegas);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].speedup == 1.0);
  CHECK(rep.rows[0].compressed_bits == 1e8);
  CHECK(rep.rows[1].compressed_bits == doctest::Approx(1e7));
  CHECK(rep.rows[0].region_from == Region::area3_beta_dominated);
  CHECK(rep.rows[3].region_to == Region::area1_alpha_dominated);
  // plateau: T(s)/alpha
  CHECK(rep.rows[3].speedup == doctest::Approx(expected_time(p, 1e8) / 1e-4).epsilon(1e-6));

  // deep area 3 at both ends: speedup >= 0.95 omega
  const TimeModelParams q(1e-6, 1e-9);
  for (double omega : {2.0, 10.0, 100.0}) {
    const double s = 100 * q.alpha() / q.beta() * omega;  // beta s / omega = 100 alpha
    CHECK(classify_region(q, s / omega, 100) == Region::area3_beta_dominated);
    CHECK(eta(q, s, omega) >= 0.95 * omega);
  }
}

TEST_CASE("speedup curve") {
  const auto grid = geometric_grid(1.0, 1e6, 25);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 1e6);

  const auto identity = speedup_curve(TimeModelParams(0, 1e-9), 1e7, grid);
  for (const auto& row : identity.rows) CHECK(row.speedup == row.omega);

  const TimeModelParams p(1e-3, 1e-9);
  const auto curve = speedup_curve(p, 1e7, grid);
  for (std::size_t i = 1; i < curve.rows.size(); ++i) CHECK(curve.rows[i].speedup >= curve.rows[i - 1].speedup);
  CHECK(curve.rows.back().speedup <= 1 + 1e-9 * 1e7 / 1e-3);

  const std::vector<double> unsorted{1, 5, 2};
  CHECK_THROWS_AS(speedup_curve(p, 1e7, unsorted), ParameterError);
}

TEST_CASE("speedup CSV layout") {
  const std::vector<double> omegas{1.0, 4.0};
  std::ostringstream out;
  write_speedup_csv(out, transition_report(TimeModelParams(1, 1), 100, omegas));
  CHECK(out.str() ==
        "omega,compressed_bits,region_from,region_to,expected_time_s,speedup\n"
        "1,100,area3_beta_dominated,area3_beta_dominated,101,1\n"
        "4,25,area3_beta_dominated,area3_beta_dominated,26,3.8846153846153846\n");
}
