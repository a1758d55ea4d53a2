#include "commcost/compression.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <unordered_set>

#include <fmt/format.h>

#include "commcost/errors.hpp"
#include "commcost/rng.hpp"

namespace commcost {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_k(std::uint64_t k, std::uint64_t d) {
  if (k < 1 || k > d) throw ParameterError(fmt::format("k = {} outside [1, d = {}]", k, d));
}

void require_rank(std::uint64_t r, std::uint64_t rows, std::uint64_t cols, std::uint64_t d) {
  if (rows == 0 || cols == 0 || rows * cols < d)
    throw ParameterError(fmt::format("rank_r reshape {}x{} cannot hold d = {}", rows, cols, d));
  if (r < 1 || r > std::min(rows, cols))
    throw ParameterError(fmt::format("rank r = {} outside [1, min({}, {})]", r, rows, cols));
}

std::pair<std::uint64_t, std::uint64_t> resolve_shape(const CompressorSpec& spec, std::uint64_t d,
                                                      std::optional<std::uint64_t> rows,
                                                      std::optional<std::uint64_t> cols) {
  if (rows.has_value() != cols.has_value()) throw ParameterError("rank_r needs both rows and cols");
  if (rows) return {*rows, *cols};
  if (spec.shape) return *spec.shape;
  return default_matrix_shape(d);
}

// Gram-Schmidt on the columns of a row-major (rows x r) matrix.  A column whose
// residual collapses to rounding noise is zeroed instead of normalized.
void orthonormalize_columns(std::vector<double>& m, std::uint64_t rows, std::uint64_t r) {
  for (std::uint64_t j = 0; j < r; ++j) {
    double before = 0.0;
    for (std::uint64_t i = 0; i < rows; ++i) before += m[i * r + j] * m[i * r + j];
    for (std::uint64_t prev = 0; prev < j; ++prev) {
      double dot = 0.0;
      for (std::uint64_t i = 0; i < rows; ++i) dot += m[i * r + j] * m[i * r + prev];
      for (std::uint64_t i = 0; i < rows; ++i) m[i * r + j] -= dot * m[i * r + prev];
    }
    double after = 0.0;
    for (std::uint64_t i = 0; i < rows; ++i) after += m[i * r + j] * m[i * r + j];
    const double norm = std::sqrt(after);
    if (before == 0.0 || norm <= 1e-12 * std::sqrt(before)) {
      for (std::uint64_t i = 0; i < rows; ++i) m[i * r + j] = 0.0;
      continue;
    }
    for (std::uint64_t i = 0; i < rows; ++i) m[i * r + j] /= norm;
  }
}

}  // namespace

std::string_view to_string(CompressorKind kind) noexcept {
  switch (kind) {
    case CompressorKind::identity: return "identity";
    case CompressorKind::rand_k: return "rand_k";
    case CompressorKind::top_k: return "top_k";
    case CompressorKind::natural: return "natural";
    case CompressorKind::rank_r: return "rank_r";
  }
  return "unknown";
}

CompressorKind parse_compressor_kind(std::string_view tag) {
  for (auto k : {CompressorKind::identity, CompressorKind::rand_k, CompressorKind::top_k, CompressorKind::natural,
                 CompressorKind::rank_r}) {
    if (tag == to_string(k)) return k;
  }
  throw ParameterError(fmt::format("unknown compressor kind '{}'", tag));
}

DenseVector::DenseVector(std::vector<double> values, unsigned bits_per_scalar)
    : values_(std::move(values)), bits_per_scalar_(bits_per_scalar) {
  if (values_.empty()) throw ParameterError("DenseVector: dimension must be >= 1");
  if (bits_per_scalar_ == 0) throw ParameterError("DenseVector: bits_per_scalar must be positive");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw ParameterError(fmt::format("DenseVector: non-finite value at {}", i));
  }
}

double DenseVector::squared_norm() const noexcept {
  return std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0);
}

bool CompressorSpec::unbiased() const noexcept {
  return kind == CompressorKind::identity || kind == CompressorKind::rand_k || kind == CompressorKind::natural;
}

std::optional<Ratio> CompressorSpec::variance_factor(std::uint64_t d) const {
  switch (kind) {
    case CompressorKind::identity: return Ratio(1, 1);
    case CompressorKind::rand_k: require_k(k, d); return Ratio(d, k);
    case CompressorKind::natural: return Ratio(9, 8);
    default: return std::nullopt;
  }
}

std::optional<Ratio> CompressorSpec::contraction_factor(std::uint64_t d) const {
  switch (kind) {
    case CompressorKind::identity: return Ratio(1, 1);
    case CompressorKind::top_k: require_k(k, d); return Ratio(d, k);
    default: return std::nullopt;
  }
}

void CompressorSpec::validate(std::uint64_t d) const {
  if (d == 0) throw ParameterError("dimension must be >= 1");
  switch (kind) {
    case CompressorKind::rand_k:
    case CompressorKind::top_k: require_k(k, d); break;
    case CompressorKind::rank_r: {
      auto [rows, cols] = resolve_shape(*this, d, std::nullopt, std::nullopt);
      require_rank(r, rows, cols, d);
      break;
    }
    default: break;
  }
}

unsigned ceil_log2(std::uint64_t d) noexcept {
  return d <= 1 ? 0u : static_cast<unsigned>(std::bit_width(d - 1));
}

unsigned natural_bits_per_scalar(unsigned b) {
  switch (b) {
    case 16: return 1 + 5;
    case 32: return 1 + 8;
    case 64: return 1 + 11;
    default: throw ParameterError(fmt::format("natural compression has no exponent layout for b = {}", b));
  }
}

std::pair<std::uint64_t, std::uint64_t> default_matrix_shape(std::uint64_t d) noexcept {
  auto rows = static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  while (rows > 1 && (rows - 1) * (rows - 1) >= d) --rows;
  while (rows * rows < d) ++rows;
  if (rows == 0) rows = 1;
  return {rows, (d + rows - 1) / rows};
}

std::vector<std::uint64_t> rand_k_indices(std::uint64_t d, std::uint64_t k, std::uint64_t seed) {
  require_k(k, d);
  std::vector<std::uint64_t> out;
  out.reserve(k);
  if (k == d) {
    out.resize(d);
    std::iota(out.begin(), out.end(), std::uint64_t{0});
    return out;
  }
  // Floyd's sampling: uniform over k-subsets, O(k) memory
  CounterRng rng(seed);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  for (std::uint64_t j = d - k; j < d; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  out.assign(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

CompressedMessage identity_compress(const DenseVector& x) {
  CompressedMessage msg;
  msg.kind = CompressorKind::identity;
  msg.payload = DensePayload{{x.values().begin(), x.values().end()}};
  msg.bits = x.total_bits();
  msg.d = x.size();
  msg.bits_per_scalar = x.bits_per_scalar();
  return msg;
}

CompressedMessage rand_k_compress(const DenseVector& x, std::uint64_t k, std::uint64_t seed) {
  const std::uint64_t d = x.size();
  const auto idx = rand_k_indices(d, k, seed);
  const double scale = static_cast<double>(d) / static_cast<double>(k);
  RandKPayload payload;
  payload.values.reserve(k);
  for (auto i : idx) payload.values.push_back(scale * x[i]);

  CompressedMessage msg;
  msg.kind = CompressorKind::rand_k;
  msg.payload = std::move(payload);
  msg.bits = k * x.bits_per_scalar();
  msg.d = d;
  msg.bits_per_scalar = x.bits_per_scalar();
  msg.seed = seed;
  return msg;
}

CompressedMessage top_k_compress(const DenseVector& x, std::uint64_t k) {
  const std::uint64_t d = x.size();
  require_k(k, d);
  std::vector<std::uint64_t> order(d);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  // larger magnitude first, lower index on ties
  auto before = [&](std::uint64_t a, std::uint64_t b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), before);
  order.resize(k);
  std::sort(order.begin(), order.end());

  TopKPayload payload;
  payload.indices = order;
  payload.values.reserve(k);
  for (auto i : order) payload.values.push_back(x[i]);

  CompressedMessage msg;
  msg.kind = CompressorKind::top_k;
  msg.payload = std::move(payload);
  msg.bits = k * x.bits_per_scalar() + k * ceil_log2(d);
  msg.d = d;
  msg.bits_per_scalar = x.bits_per_scalar();
  return msg;
}

double natural_round_down_probability(double magnitude) {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) return 0.0;
  int exp = 0;
  const double mant = std::frexp(magnitude, &exp);  // magnitude = mant * 2^exp, mant in [0.5, 1)
  if (mant == 0.5) return 0.0;
  const double lo = std::ldexp(1.0, exp - 1);
  const double hi = std::ldexp(1.0, exp);
  return (hi - magnitude) / lo;
}

double natural_round(double v, double u) {
  if (v == 0.0) return 0.0;
  const double mag = std::abs(v);
  int exp = 0;
  const double mant = std::frexp(mag, &exp);
  if (mant == 0.5) return v;
  const double lo = std::ldexp(1.0, exp - 1);
  const double hi = std::ldexp(1.0, exp);
  // hi overflows only within one binade of DBL_MAX; keep the result finite
  const double rounded = (u < (hi - mag) / lo || !std::isfinite(hi)) ? lo : hi;
  return std::copysign(rounded, v);
}

CompressedMessage natural_compress(const DenseVector& x, std::uint64_t seed) {
  const unsigned per_scalar = natural_bits_per_scalar(x.bits_per_scalar());
  CounterRng rng(seed);
  NaturalPayload payload;
  payload.values.reserve(x.size());
  for (double v : x.values()) payload.values.push_back(natural_round(v, rng.uniform()));

  CompressedMessage msg;
  msg.kind = CompressorKind::natural;
  msg.payload = std::move(payload);
  msg.bits = x.size() * std::uint64_t{per_scalar};
  msg.d = x.size();
  msg.bits_per_scalar = x.bits_per_scalar();
  return msg;
}

CompressedMessage rank_r_compress(const DenseVector& x, std::uint64_t r, std::uint64_t rows, std::uint64_t cols,
                                  std::uint64_t seed) {
  const std::uint64_t d = x.size();
  require_rank(r, rows, cols, d);

  std::vector<double> m(rows * cols, 0.0);
  std::copy(x.values().begin(), x.values().end(), m.begin());

  CounterRng rng(seed);
  std::vector<double> test(cols * r);
  for (auto& g : test) g = rng.normal();

  // P = M G
  RankRPayload payload{rows, cols, r, std::vector<double>(rows * r, 0.0), std::vector<double>(cols * r, 0.0)};
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double mic = m[i * cols + c];
      if (mic == 0.0) continue;
      for (std::uint64_t j = 0; j < r; ++j) payload.p[i * r + j] += mic * test[c * r + j];
    }
  orthonormalize_columns(payload.p, rows, r);
  // Q = M^T P
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t c = 0; c < cols; ++c) {
      const double mic = m[i * cols + c];
      if (mic == 0.0) continue;
      for (std::uint64_t j = 0; j < r; ++j) payload.q[c * r + j] += mic * payload.p[i * r + j];
    }

  CompressedMessage msg;
  msg.kind = CompressorKind::rank_r;
  msg.payload = std::move(payload);
  msg.bits = r * (rows + cols) * x.bits_per_scalar();
  msg.d = d;
  msg.bits_per_scalar = x.bits_per_scalar();
  return msg;
}

CompressedMessage compress(const DenseVector& x, const CompressorSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case CompressorKind::identity: return identity_compress(x);
    case CompressorKind::rand_k: return rand_k_compress(x, spec.k, seed);
    case CompressorKind::top_k: return top_k_compress(x, spec.k);
    case CompressorKind::natural: return natural_compress(x, seed);
    case CompressorKind::rank_r: {
      auto [rows, cols] = resolve_shape(spec, x.size(), std::nullopt, std::nullopt);
      return rank_r_compress(x, spec.r, rows, cols, seed);
    }
  }
  throw ParameterError("unknown compressor kind");
}

DenseVector decompress(const CompressedMessage& msg) {
  const std::uint64_t d = msg.d;
  if (d == 0) throw DecodeError("message dimension is zero");
  if (msg.bits_per_scalar == 0) throw DecodeError("message bits_per_scalar is zero");
  if (msg.seed.has_value() != (msg.kind == CompressorKind::rand_k))
    throw DecodeError("seed must be present exactly for rand_k messages");

  auto expect_kind = [&](CompressorKind k) {
    if (msg.kind != k) throw DecodeError(fmt::format("payload does not match kind {}", to_string(msg.kind)));
  };

  std::vector<double> out(d, 0.0);
  std::visit(
      overloaded{
          [&](const DensePayload& p) {
            expect_kind(CompressorKind::identity);
            if (p.values.size() != d) throw DecodeError("dense payload length != d");
            out = p.values;
          },
          [&](const RandKPayload& p) {
            expect_kind(CompressorKind::rand_k);
            if (p.values.empty() || p.values.size() > d) throw DecodeError("rand_k payload length outside [1, d]");
            const auto idx = rand_k_indices(d, p.values.size(), *msg.seed);
            for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = p.values[j];
          },
          [&](const TopKPayload& p) {
            expect_kind(CompressorKind::top_k);
            if (p.indices.size() != p.values.size() || p.indices.empty() || p.indices.size() > d)
              throw DecodeError("top_k payload has inconsistent lengths");
            for (std::size_t j = 0; j < p.indices.size(); ++j) {
              if (p.indices[j] >= d) throw DecodeError("top_k index out of range");
              if (j > 0 && p.indices[j] <= p.indices[j - 1]) throw DecodeError("top_k indices not strictly ascending");
              out[p.indices[j]] = p.values[j];
            }
          },
          [&](const NaturalPayload& p) {
            expect_kind(CompressorKind::natural);
            if (p.values.size() != d) throw DecodeError("natural payload length != d");
            out = p.values;
          },
          [&](const RankRPayload& p) {
            expect_kind(CompressorKind::rank_r);
            if (p.rows == 0 || p.cols == 0 || p.rank == 0 || p.rows * p.cols < d ||
                p.p.size() != p.rows * p.rank || p.q.size() != p.cols * p.rank)
              throw DecodeError("rank_r payload has inconsistent factor shapes");
            for (std::uint64_t idx = 0; idx < d; ++idx) {
              const std::uint64_t i = idx / p.cols, c = idx % p.cols;
              double acc = 0.0;
              for (std::uint64_t j = 0; j < p.rank; ++j) acc += p.p[i * p.rank + j] * p.q[c * p.rank + j];
              out[idx] = acc;
            }
          },
      },
      msg.payload);

  for (double v : out)
    if (!std::isfinite(v)) throw DecodeError("decoded vector has a non-finite value");
  return DenseVector(std::move(out), msg.bits_per_scalar);
}

std::uint64_t transmitted_bits(const CompressorSpec& spec, std::uint64_t d, unsigned b) {
  if (b == 0) throw ParameterError("bits_per_scalar must be positive");
  spec.validate(d);
  switch (spec.kind) {
    case CompressorKind::identity: return d * b;
    case CompressorKind::rand_k: return spec.k * b;
    case CompressorKind::top_k: return spec.k * b + spec.k * ceil_log2(d);
    case CompressorKind::natural: return d * natural_bits_per_scalar(b);
    case CompressorKind::rank_r: {
      auto [rows, cols] = resolve_shape(spec, d, std::nullopt, std::nullopt);
      return spec.r * (rows + cols) * b;
    }
  }
  throw ParameterError("unknown compressor kind");
}

Ratio omega_inf(const CompressorSpec& spec, std::uint64_t d, unsigned b, std::optional<std::uint64_t> rows,
                std::optional<std::uint64_t> cols) {
  if (spec.kind == CompressorKind::rank_r && (rows || cols)) {
    auto with_shape = spec;
    with_shape.shape = resolve_shape(spec, d, rows, cols);
    return Ratio(d * b, transmitted_bits(with_shape, d, b));
  }
  if (spec.kind != CompressorKind::rank_r && (rows || cols))
    throw ParameterError("rows/cols only apply to rank_r");
  return Ratio(d * b, transmitted_bits(spec, d, b));
}

// ---- byte encoding ---------------------------------------------------------

namespace {

constexpr std::uint32_t kMagic = 0x314d4343;  // "CCM1"

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { raw(v); }
  void u64(std::uint64_t v) { raw(v); }
  void f64(double v) { raw(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  template <class T>
  void raw(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(raw<std::uint8_t>()); }
  std::uint32_t u32() { return raw<std::uint32_t>(); }
  std::uint64_t u64() { return raw<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(raw<std::uint64_t>()); }
  std::uint64_t count() {
    const auto n = u64();
    if (n > (b_.size() - pos_) / 8) throw DecodeError("encoded length exceeds buffer");
    return n;
  }
  std::vector<double> f64s() {
    std::vector<double> v(count());
    for (auto& x : v) x = f64();
    return v;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  template <class T>
  T raw() {
    if (b_.size() - pos_ < sizeof(T)) throw DecodeError("truncated message");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode(const CompressedMessage& msg) {
  Writer w;
  w.u32(kMagic);
  w.u8(static_cast<std::uint8_t>(msg.kind));
  w.u32(msg.bits_per_scalar);
  w.u64(msg.d);
  w.u64(msg.bits);
  w.u8(msg.seed.has_value() ? 1 : 0);
  w.u64(msg.seed.value_or(0));
  std::visit(overloaded{
                 [&](const DensePayload& p) { w.f64s(p.values); },
                 [&](const RandKPayload& p) { w.f64s(p.values); },
                 [&](const TopKPayload& p) {
                   w.u64(p.indices.size());
                   for (auto i : p.indices) w.u64(i);
                   w.f64s(p.values);
                 },
                 [&](const NaturalPayload& p) { w.f64s(p.values); },
                 [&](const RankRPayload& p) {
                   w.u64(p.rows);
                   w.u64(p.cols);
                   w.u64(p.rank);
                   w.f64s(p.p);
                   w.f64s(p.q);
                 },
             },
             msg.payload);
  return w.take();
}

CompressedMessage decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.u32() != kMagic) throw DecodeError("bad magic");
  CompressedMessage msg;
  const auto kind = r.u8();
  if (kind > static_cast<std::uint8_t>(CompressorKind::rank_r)) throw DecodeError("unknown kind tag");
  msg.kind = static_cast<CompressorKind>(kind);
  msg.bits_per_scalar = r.u32();
  msg.d = r.u64();
  msg.bits = r.u64();
  const bool has_seed = r.u8() != 0;
  const auto seed = r.u64();
  if (has_seed) msg.seed = seed;
  switch (msg.kind) {
    case CompressorKind::identity: msg.payload = DensePayload{r.f64s()}; break;
    case CompressorKind::rand_k: msg.payload = RandKPayload{r.f64s()}; break;
    case CompressorKind::natural: msg.payload = NaturalPayload{r.f64s()}; break;
    case CompressorKind::top_k: {
      TopKPayload p;
      p.indices.resize(r.count());
      for (auto& i : p.indices) i = r.u64();
      p.values = r.f64s();
      msg.payload = std::move(p);
      break;
    }
    case CompressorKind::rank_r: {
      RankRPayload p;
      p.rows = r.u64();
      p.cols = r.u64();
      p.rank = r.u64();
      p.p = r.f64s();
      p.q = r.f64s();
      msg.payload = std::move(p);
      break;
    }
  }
  if (!r.done()) throw DecodeError("trailing bytes after message");
  return msg;
}

}  // namespace commcost
