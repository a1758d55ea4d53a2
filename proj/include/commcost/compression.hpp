#pragma once

// Gradient compression operators with exact transmitted-bit accounting.
//
// Every operator returns a CompressedMessage whose `bits` field is the number
// of bits that actually has to cross the wire, and decompress() turns the
// message back into C(x) in R^d.  omega_inf() gives the degree of compression
// len(x) / len(C(x)) as an exact rational.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "commcost/ratio.hpp"

namespace commcost {

inline constexpr unsigned kDefaultBitsPerScalar = 32;

enum class CompressorKind : std::uint8_t { identity = 0, rand_k = 1, top_k = 2, natural = 3, rank_r = 4 };

std::string_view to_string(CompressorKind kind) noexcept;
/// Accepts the tags used in configs and CSVs ("identity", "rand_k", ...).
CompressorKind parse_compressor_kind(std::string_view tag);

/// A vector in R^d together with its on-the-wire scalar width b.
class DenseVector {
 public:
  /// Throws ParameterError on empty input, non-finite entries or b == 0.
  explicit DenseVector(std::vector<double> values, unsigned bits_per_scalar = kDefaultBitsPerScalar);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  unsigned bits_per_scalar() const noexcept { return bits_per_scalar_; }
  /// len(x) = d * b
  std::uint64_t total_bits() const noexcept { return values_.size() * std::uint64_t{bits_per_scalar_}; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double squared_norm() const noexcept;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
  unsigned bits_per_scalar_;
};

struct DensePayload {
  std::vector<double> values;
  friend bool operator==(const DensePayload&, const DensePayload&) = default;
};

/// Scaled values of the selected coordinates, in ascending index order.
/// Indices are not sent: the receiver regenerates them from the shared seed.
struct RandKPayload {
  std::vector<double> values;
  friend bool operator==(const RandKPayload&, const RandKPayload&) = default;
};

/// Strictly ascending indices and the matching values.
struct TopKPayload {
  std::vector<std::uint64_t> indices;
  std::vector<double> values;
  friend bool operator==(const TopKPayload&, const TopKPayload&) = default;
};

/// Values already rounded to signed powers of two (or zero).
struct NaturalPayload {
  std::vector<double> values;
  friend bool operator==(const NaturalPayload&, const NaturalPayload&) = default;
};

/// Row-major factors P (rows x rank) and Q (cols x rank); C(x) = flatten(P Q^T)[0, d).
struct RankRPayload {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t rank = 0;
  std::vector<double> p;
  std::vector<double> q;
  friend bool operator==(const RankRPayload&, const RankRPayload&) = default;
};

using Payload = std::variant<DensePayload, RandKPayload, TopKPayload, NaturalPayload, RankRPayload>;

struct CompressedMessage {
  CompressorKind kind = CompressorKind::identity;
  Payload payload;
  std::uint64_t bits = 0;  // exact transmitted bits
  std::uint64_t d = 0;
  unsigned bits_per_scalar = kDefaultBitsPerScalar;
  std::optional<std::uint64_t> seed;  // present iff kind == rand_k

  /// Achieved len(x) / len(C(x)).
  Ratio omega_inf() const { return Ratio(d * bits_per_scalar, bits); }

  friend bool operator==(const CompressedMessage&, const CompressedMessage&) = default;
};

/// Operator choice plus its power parameter.  `k` is used by rand_k/top_k,
/// `r` (and optionally an explicit rows x cols reshape) by rank_r.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  std::uint64_t k = 0;
  std::uint64_t r = 0;
  std::optional<std::pair<std::uint64_t, std::uint64_t>> shape;

  static CompressorSpec identity() { return {}; }
  static CompressorSpec rand_k(std::uint64_t k) { return {CompressorKind::rand_k, k, 0, std::nullopt}; }
  static CompressorSpec top_k(std::uint64_t k) { return {CompressorKind::top_k, k, 0, std::nullopt}; }
  static CompressorSpec natural() { return {CompressorKind::natural, 0, 0, std::nullopt}; }
  static CompressorSpec rank_r(std::uint64_t r) { return {CompressorKind::rank_r, 0, r, std::nullopt}; }

  bool unbiased() const noexcept;

  /// zeta with E||C(x)||^2 <= zeta ||x||^2 for unbiased operators (identity 1,
  /// rand_k d/k, natural 9/8); nullopt for biased ones.
  std::optional<Ratio> variance_factor(std::uint64_t d) const;

  /// delta with ||C(x) - x||^2 <= (1 - 1/delta) ||x||^2 (top_k d/k, identity 1);
  /// nullopt where no contraction bound is attached.
  std::optional<Ratio> contraction_factor(std::uint64_t d) const;

  /// Throws ParameterError if the spec cannot be applied to a d-vector.
  void validate(std::uint64_t d) const;
};

/// ceil(log2(d)); 0 for d == 1.
unsigned ceil_log2(std::uint64_t d) noexcept;

/// Bits per scalar for natural compression: sign + exponent of the IEEE format of width b.
unsigned natural_bits_per_scalar(unsigned b);

/// Matrix reshape used by rank_r when none is given: rows = ceil(sqrt d), cols = ceil(d / rows).
std::pair<std::uint64_t, std::uint64_t> default_matrix_shape(std::uint64_t d) noexcept;

/// The uniformly random k-subset of [0, d) keyed by `seed`, sorted ascending.
std::vector<std::uint64_t> rand_k_indices(std::uint64_t d, std::uint64_t k, std::uint64_t seed);

CompressedMessage identity_compress(const DenseVector& x);
CompressedMessage rand_k_compress(const DenseVector& x, std::uint64_t k, std::uint64_t seed);
CompressedMessage top_k_compress(const DenseVector& x, std::uint64_t k);
CompressedMessage natural_compress(const DenseVector& x, std::uint64_t seed);
CompressedMessage rank_r_compress(const DenseVector& x, std::uint64_t r, std::uint64_t rows, std::uint64_t cols,
                                  std::uint64_t seed = 0);

/// Probability of rounding |v| down to 2^floor(log2|v|).  Zero for exact powers of two.
double natural_round_down_probability(double magnitude);

/// Stochastic power-of-two rounding of one scalar driven by a uniform draw u in [0, 1).
double natural_round(double v, double u);

/// Dispatches on spec.kind.  `seed` feeds rand_k's shared index stream, natural's
/// rounding draws and rank_r's test matrix.
CompressedMessage compress(const DenseVector& x, const CompressorSpec& spec, std::uint64_t seed);

/// Receiver side.  Throws DecodeError on a malformed message.
DenseVector decompress(const CompressedMessage& msg);

/// Closed-form bit count of C(x) for a d-vector with scalar width b.
std::uint64_t transmitted_bits(const CompressorSpec& spec, std::uint64_t d, unsigned b = kDefaultBitsPerScalar);

/// len(x) / len(C(x)) as an exact ratio.  For rank_r the explicit rows/cols
/// override spec.shape and the default reshape.
Ratio omega_inf(const CompressorSpec& spec, std::uint64_t d, unsigned b = kDefaultBitsPerScalar,
                std::optional<std::uint64_t> rows = std::nullopt, std::optional<std::uint64_t> cols = std::nullopt);

/// Little-endian byte image of a message.
std::vector<std::uint8_t> encode(const CompressedMessage& msg);
/// Inverse of encode().  Throws DecodeError on truncated or inconsistent input.
CompressedMessage decode(std::span<const std::uint8_t> bytes);

}  // namespace commcost
