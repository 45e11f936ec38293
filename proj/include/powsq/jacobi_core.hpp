#pragma once

/**
 * @file jacobi_core.hpp
 * @brief Sector off-diagonals b_{m,k,kappa} and the zero-diagonal three-term
 *        recursion
 *
 *     b_m f_{m+1} - lambda' f_m + b_{m-1} f_{m-1} = 0,
 *
 * solved for complex lambda' in scaled (direction, log-magnitude) storage.
 *
 * The operator a^k + a^{+k} leaves the span of |m k + kappa>, m >= 0, invariant
 * and acts there as the Jacobi matrix with zero diagonal and off-diagonals
 * b_m = sqrt((mk + kappa + 1)(mk + kappa + 2) ... (mk + kappa + k)).
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "powsq/detail/eft.hpp"
#include "powsq/errors.hpp"
#include "powsq/special_fn.hpp"

namespace powsq {

using cplx = std::complex<double>;

/// Invariant subspace selector: basis |m k + kappa>, m = 0, 1, ...
class SectorParams {
public:
  SectorParams(int k, int kappa) : k_(k), kappa_(kappa)
  {
    if (k < 1) throw std::invalid_argument("sector: k must be >= 1, got " + std::to_string(k));
    if (kappa < 0 || kappa >= k)
      throw std::invalid_argument("sector: kappa must lie in [0, k-1], got " + std::to_string(kappa));
  }

  int k() const noexcept { return k_; }
  int kappa() const noexcept { return kappa_; }

  /// Photon number of the m-th basis state.
  std::int64_t level(std::int64_t m) const
  {
    std::int64_t mk = 0;
    if (__builtin_mul_overflow(m, static_cast<std::int64_t>(k_), &mk))
      throw std::overflow_error("sector: m*k overflows at m=" + std::to_string(m));
    return mk + kappa_;
  }

  friend bool operator==(const SectorParams&, const SectorParams&) = default;

private:
  int k_;
  int kappa_;
};

/// b_m for one sector. The product of the k integer factors is formed exactly
/// in 128-bit arithmetic; if it exceeds 2^128 the square root is taken of the
/// log-domain sum instead. Throws std::overflow_error naming m if b_m itself
/// is not representable.
inline double off_diagonal(const SectorParams& sector, std::int64_t m)
{
  if (m < 0) throw std::domain_error("off_diagonal: m must be >= 0, got " + std::to_string(m));
  const std::int64_t base = sector.level(m) + 1;
  unsigned __int128 product = 1;
  bool wide = false;
  for (int p = 0; p < sector.k(); ++p) {
    const auto factor = static_cast<unsigned __int128>(base + p);
    if (__builtin_mul_overflow(product, factor, &product)) {
      wide = true;
      break;
    }
  }
  if (!wide) return static_cast<double>(std::sqrt(static_cast<long double>(product)));

  long double log_product = 0.0L;
  for (int p = 0; p < sector.k(); ++p)
    log_product += std::log(static_cast<long double>(base + p));
  const double value = static_cast<double>(std::exp(0.5L * log_product));
  if (!std::isfinite(value))
    throw std::overflow_error("off_diagonal: b_m overflows binary64 at m=" + std::to_string(m));
  return value;
}

/// b_0 .. b_{M-1} of one sector.
struct OffDiagonalSequence {
  SectorParams sector;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t m) const { return values[m]; }
};

inline OffDiagonalSequence off_diagonals(const SectorParams& sector, std::size_t count)
{
  OffDiagonalSequence seq{sector, {}};
  seq.values.reserve(count);
  for (std::size_t m = 0; m < count; ++m)
    seq.values.push_back(off_diagonal(sector, static_cast<std::int64_t>(m)));
  return seq;
}

/// f_k(n) = (n+k)!/n! - n!/(n-k)!, the eigenvalue of [a^k, a^{+k}] on |n>.
/// The second term is 0 for n < k. Exact; throws std::overflow_error once the
/// rising product leaves uint64 (about n*k > 2.6e6 for k = 3, n > 5.9e3 for k = 5).
inline std::uint64_t commutator_weight(int k, std::uint64_t n)
{
  if (k < 1) throw std::invalid_argument("commutator_weight: k must be >= 1");
  std::uint64_t rising = 1;
  std::uint64_t falling = n >= static_cast<std::uint64_t>(k) ? 1 : 0;
  for (int p = 1; p <= k; ++p) {
    if (__builtin_mul_overflow(rising, n + static_cast<std::uint64_t>(p), &rising))
      throw std::overflow_error("commutator_weight: overflow at k=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
    if (falling != 0) falling *= n - static_cast<std::uint64_t>(p - 1);
  }
  return rising - falling;
}

/// Floating-point f_k(n) for states whose levels exceed the uint64 range.
inline long double commutator_weight_ld(int k, std::uint64_t n)
{
  long double rising = 1.0L;
  long double falling = n >= static_cast<std::uint64_t>(k) ? 1.0L : 0.0L;
  for (int p = 1; p <= k; ++p) {
    rising *= static_cast<long double>(n + static_cast<std::uint64_t>(p));
    falling *= static_cast<long double>(n) - static_cast<long double>(p - 1);
  }
  return rising - falling;
}

enum class InitialKind {
  Polynomial, ///< f_{-1} = 0, f_0 = 1
  Second,     ///< f_0 = 0, f_1 = 1/b_0
  Minimal,    ///< backward (Miller) recursion from a far cutoff, f_0 normalized to 1
};

inline const char* to_string(InitialKind kind)
{
  switch (kind) {
  case InitialKind::Polynomial: return "polynomial";
  case InitialKind::Second: return "second";
  case InitialKind::Minimal: return "minimal";
  }
  return "?";
}

/// f_0 .. f_M stored as f_m = direction_m * exp(log_abs_m); a zero f_m has
/// direction 0 and log_abs -inf.
class RecursionSolution {
public:
  RecursionSolution(OffDiagonalSequence offdiag, cplx lambda_prime, InitialKind kind,
                    std::vector<cplx> direction, std::vector<double> log_abs)
      : offdiag_(std::move(offdiag)), lambda_prime_(lambda_prime), kind_(kind),
        direction_(std::move(direction)), log_abs_(std::move(log_abs))
  {
  }

  const SectorParams& sector() const noexcept { return offdiag_.sector; }
  cplx lambda_prime() const noexcept { return lambda_prime_; }
  InitialKind kind() const noexcept { return kind_; }
  const OffDiagonalSequence& offdiag() const noexcept { return offdiag_; }

  /// Number of stored coefficients (M + 1).
  std::size_t size() const noexcept { return log_abs_.size(); }
  std::size_t cutoff() const noexcept { return log_abs_.size() - 1; }

  cplx direction(std::size_t m) const { return direction_.at(m); }
  double log_abs(std::size_t m) const { return log_abs_.at(m); }
  const std::vector<double>& log_abs_values() const noexcept { return log_abs_; }

  /// f_m in plain form; overflows to inf/0 far out in m.
  cplx value(std::size_t m) const
  {
    return log_abs_.at(m) == -std::numeric_limits<double>::infinity() ? cplx{}
                                                                       : direction_[m] * std::exp(log_abs_[m]);
  }

  /// |b_m f_{m+1} - lambda' f_m + b_{m-1} f_{m-1}| divided by the sum of the
  /// three magnitudes, for 0 <= m < cutoff() (b_{-1} f_{-1} taken as 0).
  double residual(std::size_t m) const
  {
    if (m + 1 >= size()) throw std::out_of_range("residual: m must be below the cutoff");
    double ref = std::max(log_abs_[m], log_abs_[m + 1]);
    if (m > 0) ref = std::max(ref, log_abs_[m - 1]);
    if (ref == -std::numeric_limits<double>::infinity()) return 0.0;
    auto scaled = [&](std::size_t j) {
      return log_abs_[j] == -std::numeric_limits<double>::infinity() ? cplx{}
                                                                     : direction_[j] * std::exp(log_abs_[j] - ref);
    };
    const cplx up = offdiag_[m] * scaled(m + 1);
    const cplx mid = lambda_prime_ * scaled(m);
    const cplx down = m > 0 ? offdiag_[m - 1] * scaled(m - 1) : cplx{};
    const double denom = std::abs(up) + std::abs(mid) + std::abs(down);
    return denom == 0.0 ? 0.0 : std::abs(up - mid + down) / denom;
  }

private:
  OffDiagonalSequence offdiag_;
  cplx lambda_prime_;
  InitialKind kind_;
  std::vector<cplx> direction_;
  std::vector<double> log_abs_;
};

namespace detail {

// Scaled pair (older, newer) with a shared binary exponent; keeps the running
// values near 1 so M up to 1e5 (or far larger) never overflows.
class ScaledPair {
public:
  ScaledPair(cplx older, cplx newer) : older_(older), newer_(newer) {}

  cplx older() const noexcept { return older_; }
  cplx newer() const noexcept { return newer_; }

  void push(cplx next)
  {
    older_ = newer_;
    newer_ = next;
    const double mag = std::max({std::abs(older_.real()), std::abs(older_.imag()), std::abs(newer_.real()),
                                 std::abs(newer_.imag())});
    if (mag > 0x1p+500 || (mag > 0.0 && mag < 0x1p-500)) {
      int e = 0;
      std::frexp(mag, &e);
      older_ = {std::ldexp(older_.real(), -e), std::ldexp(older_.imag(), -e)};
      newer_ = {std::ldexp(newer_.real(), -e), std::ldexp(newer_.imag(), -e)};
      exponent_ += e;
    }
  }

  double log_abs_newer() const
  {
    const double a = std::abs(newer_);
    return a == 0.0 ? -std::numeric_limits<double>::infinity()
                    : std::log(a) + static_cast<double>(exponent_) * std::numbers::ln2;
  }
  cplx direction_newer() const
  {
    const double a = std::abs(newer_);
    return a == 0.0 ? cplx{} : newer_ / a;
  }

private:
  cplx older_;
  cplx newer_;
  std::int64_t exponent_ = 0;
};

// (lambda * x - w * y), both complex, evaluated with Dot2 per component.
inline cplx compensated_step(cplx lambda, cplx x, double w, cplx y)
{
  const double re = dot2({lambda.real(), -lambda.imag(), -w}, {x.real(), x.imag(), y.real()});
  const double im = dot2({lambda.real(), lambda.imag(), -w}, {x.imag(), x.real(), y.imag()});
  return {re, im};
}

} // namespace detail

/// Forward recursion for f_0 .. f_M from the chosen initial data.
inline RecursionSolution solve_recursion(const SectorParams& sector, cplx lambda_prime, std::size_t M,
                                         InitialKind kind)
{
  if (M < 1) throw std::invalid_argument("solve_recursion: M must be >= 1");
  if (!std::isfinite(lambda_prime.real()) || !std::isfinite(lambda_prime.imag()))
    throw std::invalid_argument("solve_recursion: lambda' must be finite");
  if (kind == InitialKind::Minimal)
    throw std::invalid_argument("solve_recursion: use minimal_solution for the backward recursion");
  auto b = off_diagonals(sector, M);
  std::vector<cplx> dir(M + 1);
  std::vector<double> logs(M + 1);

  std::size_t start = 0;
  detail::ScaledPair pair{cplx{}, cplx{1.0}};
  if (kind == InitialKind::Second) {
    dir[0] = cplx{};
    logs[0] = -std::numeric_limits<double>::infinity();
    pair = detail::ScaledPair{cplx{}, cplx{1.0 / b[0]}};
    start = 1;
  }
  dir[start] = pair.direction_newer();
  logs[start] = pair.log_abs_newer();

  for (std::size_t m = start; m < M; ++m) {
    const double lower = m > 0 ? b[m - 1] : 0.0;
    const cplx next = detail::compensated_step(lambda_prime, pair.newer(), lower, pair.older()) / b[m];
    pair.push(next);
    dir[m + 1] = pair.direction_newer();
    logs[m + 1] = pair.log_abs_newer();
  }
  return {std::move(b), lambda_prime, kind, std::move(dir), std::move(logs)};
}

/// Minimal (subdominant) solution on 0..M by backward recursion from
/// f_{N+1} = 0, f_N = 1 with N = far_factor * M, rescaled to f_0 = 1.
/// For non-real lambda' in the limit-point case this approximates the unique
/// square-summable (Weyl) solution.
inline RecursionSolution minimal_solution(const SectorParams& sector, cplx lambda_prime, std::size_t M,
                                          std::size_t far_factor = 100)
{
  if (M < 1) throw std::invalid_argument("minimal_solution: M must be >= 1");
  if (!std::isfinite(lambda_prime.real()) || !std::isfinite(lambda_prime.imag()))
    throw std::invalid_argument("minimal_solution: lambda' must be finite");
  const std::size_t N = far_factor * M;
  auto b = off_diagonals(sector, N + 1);

  std::vector<cplx> dir(M + 1);
  std::vector<double> logs(M + 1);
  detail::ScaledPair pair{cplx{}, cplx{1.0}};
  for (std::size_t m = N; m >= 1; --m) {
    // f_{m-1} = (lambda' f_m - b_m f_{m+1}) / b_{m-1}
    const cplx prev = detail::compensated_step(lambda_prime, pair.newer(), b[m], pair.older()) / b[m - 1];
    pair.push(prev);
    if (m - 1 <= M) {
      dir[m - 1] = pair.direction_newer();
      logs[m - 1] = pair.log_abs_newer();
    }
  }
  if (logs[0] == -std::numeric_limits<double>::infinity())
    throw NumericalError("jacobi_core", "minimal_solution", "backward solution vanishes at m = 0");
  const double shift = logs[0];
  const cplx phase = std::conj(dir[0]);
  for (std::size_t m = 0; m <= M; ++m) {
    logs[m] -= shift;
    dir[m] *= phase;
  }
  b.values.resize(M);
  return {std::move(b), lambda_prime, InitialKind::Minimal, std::move(dir), std::move(logs)};
}

// ---------------------------------------------------------------------------
// k = 1 check against Hermite polynomials

struct HermiteCheck {
  double max_deviation = 0.0;
  std::vector<double> deviation; ///< per m, |f - h| / max(|f|, |h|), 0 when both vanish
};

/// Compares the k = 1 polynomial solution with H_m(lambda/sqrt2)/sqrt(2^m m!).
inline HermiteCheck hermite_identity_check(cplx lambda, std::size_t M)
{
  if (M > 100) throw std::domain_error("hermite_identity_check: M must be <= 100");
  const auto sol = solve_recursion(SectorParams{1, 0}, lambda, std::max<std::size_t>(M, 1), InitialKind::Polynomial);
  const cplx x = lambda / std::numbers::sqrt2;
  HermiteCheck out;
  out.deviation.resize(M + 1);
  for (std::size_t m = 0; m <= M; ++m) {
    const double log_norm = 0.5 * (static_cast<double>(m) * std::numbers::ln2 + std::lgamma(m + 1.0));
    const cplx h = hermite(static_cast<unsigned>(m), x) * std::exp(-log_norm);
    const cplx f = sol.value(m);
    const double scale = std::max(std::abs(f), std::abs(h));
    out.deviation[m] = scale == 0.0 ? 0.0 : std::abs(f - h) / scale;
    out.max_deviation = std::max(out.max_deviation, out.deviation[m]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// growth diagnostics

struct GrowthProfile {
  std::vector<double> log_partial_sums; ///< log S_m, S_m = sum_{j<=m} |f_j|^2
  double exponent = std::numeric_limits<double>::quiet_NaN(); ///< fitted power of |f_m| on [M/10, M]
  std::size_t envelope_points = 0;
  bool fit_ok = false; ///< false when fewer than 20 envelope points were available

  double log_partial_sum(std::size_t m) const { return log_partial_sums.at(m); }
  double partial_sum(std::size_t m) const { return std::exp(log_partial_sums.at(m)); }
};

inline constexpr std::size_t kEnvelopeBins = 60;
inline constexpr std::size_t kMinEnvelopePoints = 20;

/// Partial sums of |f_m|^2 and a least-squares power-law fit of the envelope.
/// The envelope is the maximum of |f_m| inside each of 60 logarithmically
/// spaced bins covering [M/10, M]; this skips oscillation nodes and also
/// works for monotone magnitudes. Cutoffs below ~100 give too few points and
/// leave fit_ok false.
inline GrowthProfile growth_profile(const RecursionSolution& sol)
{
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  GrowthProfile out;
  const std::size_t M = sol.cutoff();
  out.log_partial_sums.resize(M + 1);
  double acc = kNegInf;
  for (std::size_t m = 0; m <= M; ++m) {
    const double t = 2.0 * sol.log_abs(m);
    if (t != kNegInf) {
      const double hi = std::max(acc, t);
      const double lo = std::min(acc, t);
      acc = hi + std::log1p(std::exp(lo - hi));
    }
    out.log_partial_sums[m] = acc;
  }

  const double lo_edge = std::log(std::max<double>(1.0, static_cast<double>(M) / 10.0));
  const double hi_edge = std::log(static_cast<double>(M) + 1.0);
  std::vector<double> xs, ys;
  std::size_t prev_end = 0;
  for (std::size_t bin = 0; bin < kEnvelopeBins; ++bin) {
    const auto begin = std::max(
        prev_end, static_cast<std::size_t>(std::ceil(std::exp(lo_edge + (hi_edge - lo_edge) * bin / kEnvelopeBins))));
    const auto end = std::min(
        M + 1, static_cast<std::size_t>(std::ceil(std::exp(lo_edge + (hi_edge - lo_edge) * (bin + 1) / kEnvelopeBins))));
    if (begin >= end) continue;
    prev_end = end;
    std::size_t best = begin;
    for (std::size_t m = begin; m < end; ++m)
      if (sol.log_abs(m) > sol.log_abs(best)) best = m;
    if (sol.log_abs(best) == kNegInf || best == 0) continue;
    xs.push_back(std::log(static_cast<double>(best)));
    ys.push_back(sol.log_abs(best));
  }
  out.envelope_points = xs.size();
  out.fit_ok = xs.size() >= kMinEnvelopePoints;
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    out.exponent = sxy / sxx;
  }
  return out;
}

inline GrowthProfile growth_profile(const SectorParams& sector, cplx lambda, std::size_t M, InitialKind kind)
{
  if (kind == InitialKind::Minimal) return growth_profile(minimal_solution(sector, lambda, M));
  return growth_profile(solve_recursion(sector, lambda, M, kind));
}

} // namespace powsq
