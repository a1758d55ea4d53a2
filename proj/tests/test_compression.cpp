#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "commcost/compression.hpp"
#include "commcost/errors.hpp"
#include "commcost/rng.hpp"
#include "oracles.hpp"

using namespace commcost;

namespace {

std::vector<double> values_of(const DenseVector& v) { return {v.values().begin(), v.values().end()}; }

std::vector<double> random_vector(CounterRng& rng, std::size_t d) {
  std::vector<double> x(d);
  for (auto& v : x) v = rng.normal() * std::exp2(static_cast<double>(rng.below(20)) - 10.0);
  return x;
}

}  // namespace

TEST_CASE("DenseVector rejects empty, non-finite and zero-width input") {
  CHECK_THROWS_AS(DenseVector({}), ParameterError);
  CHECK_THROWS_AS(DenseVector({1.0, NAN}), ParameterError);
  CHECK_THROWS_AS(DenseVector({1.0, INFINITY}), ParameterError);
  CHECK_THROWS_AS(DenseVector({1.0}, 0), ParameterError);
  const DenseVector x({1.0, 2.0, 3.0});
  CHECK(x.total_bits() == 96);
  CHECK(DenseVector({1.0}, 64).total_bits() == 64);
}

TEST_CASE("ceil_log2 and default reshape") {
  CHECK(ceil_log2(1) == 0);
  CHECK(ceil_log2(2) == 1);
  CHECK(ceil_log2(3) == 2);
  CHECK(ceil_log2(1024) == 10);
  CHECK(ceil_log2(1025) == 11);
  CHECK(default_matrix_shape(1) == std::pair<std::uint64_t, std::uint64_t>{1, 1});
  CHECK(default_matrix_shape(10) == std::pair<std::uint64_t, std::uint64_t>{4, 3});
  CHECK(default_matrix_shape(10000) == std::pair<std::uint64_t, std::uint64_t>{100, 100});
  for (std::uint64_t d = 1; d < 500; ++d) {
    auto [rows, cols] = default_matrix_shape(d);
    CHECK(rows * cols >= d);
    CHECK((rows - 1) * (rows - 1) < d);
  }
}

TEST_CASE("rand_k full selection is the identity") {
  const DenseVector x({1, 2, 3, 4});
  const auto msg = rand_k_compress(x, 4, 99);
  CHECK(msg.bits == 4 * 32);
  CHECK(decompress(msg) == x);
}

TEST_CASE("rand_k on (6,8) with k=1 yields (12,0) or (0,16), each half the time") {
  const DenseVector x({6, 8});
  const auto subsets = oracle::subsets(2, 1);
  REQUIRE(subsets.size() == 2);
  std::map<std::vector<double>, int> seen;
  const int trials = 20000;
  for (int s = 0; s < trials; ++s) seen[values_of(decompress(rand_k_compress(x, 1, derive_key({7, std::uint64_t(s)}))))]++;
  REQUIRE(seen.size() == 2);
  CHECK(seen.count({12.0, 0.0}) == 1);
  CHECK(seen.count({0.0, 16.0}) == 1);
  // binomial(20000, 1/2): sd ~ 71
  CHECK(std::abs(seen[{12.0, 0.0}] - trials / 2) < 5 * 71);

  std::vector<double> mean(2, 0.0);
  for (const auto& s : subsets) {
    const auto y = oracle::rand_k_output({6, 8}, s);
    for (int i = 0; i < 2; ++i) mean[i] += y[i] / static_cast<double>(subsets.size());
  }
  CHECK(mean == std::vector<double>{6.0, 8.0});
}

TEST_CASE("decompress rand_k message selecting index 0 gives (12, 0)") {
  const DenseVector x({6, 8});
  std::uint64_t seed = 0;
  while (rand_k_indices(2, 1, seed) != std::vector<std::uint64_t>{0}) ++seed;
  CHECK(values_of(decompress(rand_k_compress(x, 1, seed))) == std::vector<double>{12.0, 0.0});
}

TEST_CASE("rand_k exact unbiasedness and second moment over every subset, d <= 6") {
  CounterRng rng(derive_key({1234}));
  for (std::uint64_t d = 1; d <= 6; ++d) {
    for (std::uint64_t k = 1; k <= d; ++k) {
      std::vector<double> x(d);
      for (auto& v : x) v = rng.normal();
      const DenseVector xv(x);
      const auto all = oracle::subsets(d, k);
      // Map seeds onto subsets until every subset has been realized by the implementation.
      std::map<std::vector<std::uint64_t>, std::vector<double>> realized;
      for (std::uint64_t s = 0; realized.size() < all.size() && s < 100000; ++s) {
        const auto msg = rand_k_compress(xv, k, derive_key({d, k, s}));
        realized.emplace(rand_k_indices(d, k, *msg.seed), values_of(decompress(msg)));
      }
      REQUIRE(realized.size() == all.size());
      std::vector<double> mean(d, 0.0);
      double second = 0.0;
      for (const auto& s : all) {
        const auto& y = realized.at(s);
        CHECK(y == oracle::rand_k_output(x, s));
        for (std::size_t i = 0; i < d; ++i) mean[i] += y[i] / static_cast<double>(all.size());
        double sq = 0.0;
        for (double v : y) sq += v * v;
        second += sq / static_cast<double>(all.size());
      }
      for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(mean[i] - x[i]) <= 1e-12 * std::max(1.0, std::abs(x[i])));
      // equality holds in exact arithmetic; 1e-12 absorbs rounding on unit-scale inputs
      CHECK(second <= static_cast<double>(d) / static_cast<double>(k) * xv.squared_norm() + 1e-12);
    }
  }
}

TEST_CASE("rand_k indices are a uniform k-subset") {
  // d=5, k=2: 10 subsets, 50000 draws -> expected 5000 each
  std::map<std::vector<std::uint64_t>, int> counts;
  for (std::uint64_t s = 0; s < 50000; ++s) counts[rand_k_indices(5, 2, derive_key({s}))]++;
  REQUIRE(counts.size() == 10);
  double chi2 = 0.0;
  for (const auto& [_, c] : counts) chi2 += (c - 5000.0) * (c - 5000.0) / 5000.0;
  CHECK(chi2 < 27.9);  // chi-square 9 dof, p = 0.001
}

TEST_CASE("rand_k parameter errors") {
  const DenseVector x({1, 2, 3});
  CHECK_THROWS_AS(rand_k_compress(x, 0, 1), ParameterError);
  CHECK_THROWS_AS(rand_k_compress(x, 4, 1), ParameterError);
  CHECK_THROWS_AS(top_k_compress(x, 0), ParameterError);
  CHECK_THROWS_AS(top_k_compress(x, 4), ParameterError);
}

TEST_CASE("top_k keeps the largest magnitudes with lowest-index tie-break") {
  CHECK(values_of(decompress(top_k_compress(DenseVector({3, -5, 1}), 1))) == std::vector<double>{0, -5, 0});

  const auto unique = top_k_compress(DenseVector({2, -2, 7}), 1);
  CHECK(std::get<TopKPayload>(unique.payload).indices == std::vector<std::uint64_t>{2});

  const auto tied = top_k_compress(DenseVector({2, -2, 2}), 1);
  CHECK(std::get<TopKPayload>(tied.payload).indices == std::vector<std::uint64_t>{0});
  const auto tied2 = top_k_compress(DenseVector({2, -2, 2}), 2);
  CHECK(std::get<TopKPayload>(tied2.payload).indices == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("top_k contraction on random vectors") {
  CounterRng rng(derive_key({77}));
  for (int t = 0; t < 2000; ++t) {
    const std::uint64_t d = 1 + rng.below(40);
    const DenseVector x(random_vector(rng, d));
    for (std::uint64_t k = 1; k <= d; ++k) {
      const auto y = decompress(top_k_compress(x, k));
      double err = 0.0;
      for (std::size_t i = 0; i < d; ++i) err += (y[i] - x[i]) * (y[i] - x[i]);
      CHECK(err <= (1.0 - static_cast<double>(k) / static_cast<double>(d)) * x.squared_norm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("natural compression: exact powers, zero, and the 3.0 example") {
  CHECK(natural_round(1.0, 0.0) == 1.0);
  CHECK(natural_round(1.0, 0.999) == 1.0);
  CHECK(natural_round(-0.25, 0.3) == -0.25);
  CHECK(natural_round(0.0, 0.5) == 0.0);
  CHECK(natural_round_down_probability(3.0) == 0.5);
  CHECK(natural_round(3.0, 0.1) == 2.0);
  CHECK(natural_round(3.0, 0.9) == 4.0);
  CHECK(natural_round(-3.0, 0.9) == -4.0);
  const double p = natural_round_down_probability(3.0);
  CHECK(p * 2.0 + (1 - p) * 4.0 == 3.0);

  // empirical mean over seeds
  double sum = 0.0;
  const int trials = 40000;
  for (int s = 0; s < trials; ++s) sum += decompress(natural_compress(DenseVector({3.0}), derive_key({std::uint64_t(s)})))[0];
  CHECK(std::abs(sum / trials - 3.0) < 5 * 1.0 / std::sqrt(trials));
}

TEST_CASE("natural compression is unbiased across binades") {
  CounterRng rng(derive_key({5}));
  for (int i = 0; i < 10000; ++i) {
    const double mag = std::ldexp(1.0 + rng.uniform(), static_cast<int>(rng.below(30)) - 15);
    const double p = natural_round_down_probability(mag);
    int e = 0;
    std::frexp(mag, &e);
    const double lo = std::ldexp(1.0, e - 1), hi = std::ldexp(1.0, e);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(std::abs(p * lo + (1 - p) * hi - mag) <= 1e-12 * mag);
  }
}

TEST_CASE("natural compression bits and widths") {
  const DenseVector x({1.5, -3.0, 0.0, 7.0});
  CHECK(natural_compress(x, 1).bits == 36);
  CHECK(natural_compress(DenseVector({1.5}, 64), 1).bits == 12);
  CHECK_THROWS_AS(natural_compress(DenseVector({1.5}, 24), 1), ParameterError);
  const auto rounded = decompress(natural_compress(x, 3));
  for (double v : rounded.values()) {
    if (v == 0.0) continue;
    int e = 0;
    CHECK(std::frexp(std::abs(v), &e) == 0.5);
  }
}

TEST_CASE("rank_r recovers a rank-1 matrix and maps zero to zero") {
  std::vector<double> u{1.0, -2.0, 0.5, 3.0}, v{2.0, 1.0, -1.0, 0.25, 4.0};
  std::vector<double> m;
  for (double a : u)
    for (double b : v) m.push_back(a * b);
  const DenseVector x(m);
  const auto y = decompress(rank_r_compress(x, 1, 4, 5, 11));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(y[i] - m[i]) <= 1e-9 * std::abs(m[i]) + 1e-12);

  const DenseVector zero(std::vector<double>(12, 0.0));
  for (std::uint64_t r = 1; r <= 3; ++r) {
    const auto z = decompress(rank_r_compress(zero, r, 3, 4));
    for (double val : z.values()) CHECK(val == 0.0);
  }
}

TEST_CASE("rank_r full rank reproduces the matrix; padding is dropped") {
  CounterRng rng(derive_key({3}));
  const DenseVector x(random_vector(rng, 10));  // reshaped 4x3, padded by 2
  const auto msg = rank_r_compress(x, 3, 4, 3, 8);
  CHECK(msg.bits == 3 * (4 + 3) * 32);
  const auto y = decompress(msg);
  REQUIRE(y.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-9));
  CHECK_THROWS_AS(rank_r_compress(x, 4, 4, 3), ParameterError);
  CHECK_THROWS_AS(rank_r_compress(x, 0, 4, 3), ParameterError);
  CHECK_THROWS_AS(rank_r_compress(x, 1, 3, 3), ParameterError);  // 9 < 10
}

TEST_CASE("omega_inf matches the closed forms") {
  CHECK(omega_inf(CompressorSpec::rand_k(10), 100) == Ratio(10, 1));
  CHECK(omega_inf(CompressorSpec::natural(), 100) == Ratio(32, 9));
  CHECK(omega_inf(CompressorSpec::natural(), 7) == Ratio(32, 9));
  CHECK(omega_inf(CompressorSpec::top_k(1), 1024, 32) == Ratio(32768, 42));
  CHECK(omega_inf(CompressorSpec::top_k(1), 1024, 32).value() == doctest::Approx(780.19).epsilon(1e-5));
  CHECK(omega_inf(CompressorSpec::rank_r(1), 10000, 32, 100, 100) == Ratio(50, 1));
  CHECK(omega_inf(CompressorSpec::identity(), 5) == Ratio(1, 1));
  CHECK(omega_inf(CompressorSpec::top_k(1), 1) == Ratio(1, 1));  // d = 1 sends no index bits
  CHECK_THROWS_AS(omega_inf(CompressorSpec::rand_k(11), 10), ParameterError);
  CHECK_THROWS_AS(omega_inf(CompressorSpec::rank_r(1), 10, 32, 3, std::nullopt), ParameterError);
  CHECK_THROWS_AS(omega_inf(CompressorSpec::rand_k(1), 10, 32, 3, 4), ParameterError);
}

TEST_CASE("message bits equal the closed form and omega * bits = d * b") {
  CounterRng rng(derive_key({41}));
  for (int t = 0; t < 300; ++t) {
    const std::uint64_t d = 1 + rng.below(200);
    const unsigned b = (t % 3 == 0) ? 64 : 32;
    const DenseVector x(random_vector(rng, d), b);
    const std::uint64_t k = 1 + rng.below(d);
    auto [rows, cols] = default_matrix_shape(d);
    const std::uint64_t r = 1 + rng.below(std::min(rows, cols));
    const std::vector<std::pair<CompressorSpec, std::uint64_t>> cases = {
        {CompressorSpec::identity(), d * b},
        {CompressorSpec::rand_k(k), k * b},
        {CompressorSpec::top_k(k), k * b + k * ceil_log2(d)},
        {CompressorSpec::natural(), d * (b == 64 ? 12 : 9)},
        {CompressorSpec::rank_r(r), r * (rows + cols) * b},
    };
    for (const auto& [spec, expected_bits] : cases) {
      const auto msg = compress(x, spec, 5);
      CHECK(msg.bits == expected_bits);
      CHECK(transmitted_bits(spec, d, b) == expected_bits);
      CHECK(omega_inf(spec, d, b) * Ratio(msg.bits, 1) == Ratio(d * b, 1));
      CHECK(msg.omega_inf() == omega_inf(spec, d, b));
      // Sending the compressed message never costs more than dense when the operator can actually compress.
      const bool compressing = spec.kind == CompressorKind::rand_k || spec.kind == CompressorKind::natural ||
                               spec.kind == CompressorKind::identity ||
                               (spec.kind == CompressorKind::top_k && k * (b + ceil_log2(d)) <= d * b) ||
                               (spec.kind == CompressorKind::rank_r && r * (rows + cols) <= d);
      if (compressing) CHECK(msg.bits <= d * b);
    }
  }
}

TEST_CASE("identical inputs give identical message bytes") {
  CounterRng rng(derive_key({8}));
  const DenseVector x(random_vector(rng, 37));
  for (auto spec : {CompressorSpec::identity(), CompressorSpec::rand_k(5), CompressorSpec::top_k(5),
                    CompressorSpec::natural(), CompressorSpec::rank_r(2)}) {
    const auto a = encode(compress(x, spec, 21));
    const auto b = encode(compress(x, spec, 21));
    CHECK(a == b);
    const auto round = decode(a);
    CHECK(round == compress(x, spec, 21));
    CHECK(decompress(round) == decompress(compress(x, spec, 21)));
  }
  CHECK(encode(rand_k_compress(x, 5, 1)) != encode(rand_k_compress(x, 5, 2)));
}

TEST_CASE("identity message round-trips bit-identically") {
  const DenseVector x({0.1, -1e-300, 3e300, 0.0});
  const auto y = decompress(identity_compress(x));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::bit_cast<std::uint64_t>(y[i]) == std::bit_cast<std::uint64_t>(x[i]));
}

TEST_CASE("malformed messages are decode errors") {
  auto msg = top_k_compress(DenseVector({1, 2, 3, 4}), 2);
  auto bad = msg;
  std::get<TopKPayload>(bad.payload).indices[0] = 9;
  CHECK_THROWS_AS(decompress(bad), DecodeError);
  bad = msg;
  std::get<TopKPayload>(bad.payload).indices = {3, 2};
  CHECK_THROWS_AS(decompress(bad), DecodeError);
  bad = msg;
  std::get<TopKPayload>(bad.payload).values.pop_back();
  CHECK_THROWS_AS(decompress(bad), DecodeError);

  auto rk = rand_k_compress(DenseVector({1, 2, 3}), 2, 4);
  rk.seed.reset();
  CHECK_THROWS_AS(decompress(rk), DecodeError);

  auto wrong_kind = identity_compress(DenseVector({1, 2}));
  wrong_kind.kind = CompressorKind::natural;
  CHECK_THROWS_AS(decompress(wrong_kind), DecodeError);

  auto rr = rank_r_compress(DenseVector({1, 2, 3, 4}), 1, 2, 2);
  std::get<RankRPayload>(rr.payload).q.pop_back();
  CHECK_THROWS_AS(decompress(rr), DecodeError);

  const auto bytes = encode(msg);
  CHECK_THROWS_AS(decode(std::span(bytes).first(bytes.size() - 1)), DecodeError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode(extra), DecodeError);
  auto magic = bytes;
  magic[0] ^= 0xff;
  CHECK_THROWS_AS(decode(magic), DecodeError);
}

TEST_CASE("compressor spec factors") {
  CHECK(CompressorSpec::rand_k(4).variance_factor(100) == Ratio(25, 1));
  CHECK(CompressorSpec::top_k(4).contraction_factor(100) == Ratio(25, 1));
  CHECK_FALSE(CompressorSpec::top_k(4).variance_factor(100).has_value());
  CHECK(CompressorSpec::natural().variance_factor(3) == Ratio(9, 8));
  CHECK(parse_compressor_kind("top_k") == CompressorKind::top_k);
  CHECK_THROWS_AS(parse_compressor_kind("qsgd"), ParameterError);
}

TEST_CASE("natural compression second moment stays within 9/8") {
  CounterRng rng(derive_key({19}));
  for (int i = 0; i < 2000; ++i) {
    const double mag = std::ldexp(1.0 + rng.uniform(), static_cast<int>(rng.below(40)) - 20);
    const double p = natural_round_down_probability(mag);
    int e = 0;
    std::frexp(mag, &e);
    const double lo = std::ldexp(1.0, e - 1), hi = 2 * lo;
    CHECK(p * lo * lo + (1 - p) * hi * hi <= 9.0 / 8.0 * mag * mag * (1 + 1e-12));
  }
}
