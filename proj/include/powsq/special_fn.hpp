#pragma once

/**
 * @file special_fn.hpp
 * @brief Pochhammer symbols, Hermite and Pollaczek polynomials, complex
 *        log-gamma and the Pollaczek weight function.
 *
 * Pollaczek polynomials use the normalization
 *
 *     P_m(x, b) = i^m sqrt((2b)_m / m!) 2F1(-m, b + ix; 2b; 2),
 *
 * which makes them orthonormal with respect to
 *
 *     rho_b(x) = 2^(2b-1) |Gamma(b + ix)|^2 / (pi Gamma(2b)).
 *
 * They also satisfy x P_m = c_{m+1} P_{m+1} + c_m P_{m-1} with
 * c_m = sqrt(m (m + 2b - 1)) / 2.
 */

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "powsq/detail/eft.hpp"
#include "powsq/errors.hpp"

namespace powsq {

/// Rising factorial (a)_m = a (a+1) ... (a+m-1); (a)_0 = 1.
template <typename T>
T pochhammer(const T& a, unsigned m)
{
  T result(1);
  for (unsigned j = 0; j < m; ++j)
    result *= a + T(static_cast<double>(j));
  return result;
}

inline constexpr unsigned kHermiteMaxDegree = 200;

/// Physicists' Hermite polynomial H_n(x) by the three-term recursion.
/// T may be real or std::complex. Degrees above 200 are rejected; the
/// normalized values H_n / sqrt(2^n n!) for large n are what
/// solve_recursion at k = 1 computes in scaled form.
template <typename T>
T hermite(unsigned n, const T& x)
{
  if (n > kHermiteMaxDegree)
    throw std::domain_error("hermite: degree " + std::to_string(n) + " exceeds 200");
  T prev(1);
  if (n == 0) return prev;
  T cur = T(2.0) * x;
  for (unsigned j = 1; j < n; ++j) {
    T next = T(2.0) * x * cur - T(2.0 * j) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// log-gamma

namespace detail {

// B_{2j} / (2j (2j - 1)), j = 1..12
inline constexpr std::array<double, 12> kStirlingCoefficients = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    854513.0 / 63756.0,
    -236364091.0 / 1506960.0,
};

inline constexpr double kStirlingShift = 10.0;

} // namespace detail

/// Principal-branch-agnostic complex log-gamma: the real part is log|Gamma(z)|,
/// the imaginary part is correct modulo 2 pi. Shift-and-Stirling: the
/// recurrence pushes Re z to at least 10, then a 12-term asymptotic series.
inline std::complex<double> log_gamma(std::complex<double> z)
{
  using C = std::complex<double>;
  double shift_re = 0.0;
  double shift_im = 0.0;
  while (z.real() < detail::kStirlingShift) {
    if (z.real() <= 0.0 && z.imag() == 0.0 && z.real() == std::floor(z.real()))
      throw std::domain_error("log_gamma: pole at non-positive integer");
    shift_re += 0.5 * std::log(std::norm(z));
    shift_im += std::arg(z);
    z += 1.0;
  }
  const C inv = 1.0 / z;
  const C inv2 = inv * inv;
  C series = 0.0;
  for (auto it = detail::kStirlingCoefficients.rbegin(); it != detail::kStirlingCoefficients.rend(); ++it)
    series = series * inv2 + *it;
  series *= inv;
  const C result = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
  return {result.real() - shift_re, result.imag() - shift_im};
}

/// |Gamma(b + ix)|^2, accurate to ~1e-13 relative for b in (0, 5], |x| <= 50.
inline double gamma_abs_sq(double b, double x)
{
  if (!(b > 0.0)) throw std::domain_error("gamma_abs_sq: b must be positive");
  return std::exp(2.0 * log_gamma({b, std::abs(x)}).real());
}

/// Pollaczek weight rho_b(x); even in x and normalized to unit mass.
inline double weight_rho(double b, double x)
{
  if (!(b > 0.0)) throw std::domain_error("weight_rho: b must be positive");
  const double log_rho = (2.0 * b - 1.0) * std::numbers::ln2 + 2.0 * log_gamma({b, std::abs(x)}).real() -
                         std::log(std::numbers::pi) - log_gamma({2.0 * b, 0.0}).real();
  return std::exp(log_rho);
}

// ---------------------------------------------------------------------------
// Pollaczek polynomials

/// Off-diagonal c_m = sqrt(m (m + 2b - 1)) / 2 of the orthonormal recursion.
inline double pollaczek_offdiag(unsigned m, double b)
{
  return 0.5 * std::sqrt(static_cast<double>(m) * (static_cast<double>(m) + 2.0 * b - 1.0));
}

/// P_0(x, b) .. P_{max_degree}(x, b) by the real three-term recursion.
inline std::vector<double> pollaczek_sequence(unsigned max_degree, double x, double b)
{
  if (!(b > 0.0)) throw std::domain_error("pollaczek: b must be positive");
  std::vector<double> p(max_degree + 1);
  p[0] = 1.0;
  if (max_degree == 0) return p;
  p[1] = x / pollaczek_offdiag(1, b);
  for (unsigned m = 1; m < max_degree; ++m) {
    const double num = detail::dot2({x, -pollaczek_offdiag(m, b)}, {p[m], p[m - 1]});
    p[m + 1] = num / pollaczek_offdiag(m + 1, b);
  }
  return p;
}

/// Result of evaluating the terminating hypergeometric form.
struct PollaczekSeriesValue {
  double value = 0.0;         ///< real part of i^m sqrt((2b)_m/m!) 2F1(...)
  double imag_residue = 0.0;  ///< imaginary part, zero in exact arithmetic
};

/// Hypergeometric route, summed in 113-bit binary floating point. The z = 2
/// series alternates with terms of size ~3^m, so binary64 would lose about
/// m log10(3) digits.
inline PollaczekSeriesValue pollaczek_series(unsigned m, double x, double b)
{
  using Quad = boost::multiprecision::cpp_bin_float_quad;
  if (!(b > 0.0)) throw std::domain_error("pollaczek: b must be positive");

  const Quad qb(b);
  const Quad qx(x);
  Quad term_re(1), term_im(0);
  Quad sum_re(1), sum_im(0);
  for (unsigned j = 1; j <= m; ++j) {
    // term *= (-m + j - 1)(b + ix + j - 1) * 2 / ((2b + j - 1) j)
    const Quad a_re = qb + Quad(j - 1);
    const Quad scale = Quad(2) * (Quad(static_cast<int>(j) - 1) - Quad(m)) / ((Quad(2) * qb + Quad(j - 1)) * Quad(j));
    const Quad re = term_re * a_re - term_im * qx;
    const Quad im = term_re * qx + term_im * a_re;
    term_re = re * scale;
    term_im = im * scale;
    sum_re += term_re;
    sum_im += term_im;
  }

  // multiply by i^m
  Quad out_re, out_im;
  switch (m % 4) {
  case 0: out_re = sum_re; out_im = sum_im; break;
  case 1: out_re = -sum_im; out_im = sum_re; break;
  case 2: out_re = -sum_re; out_im = -sum_im; break;
  default: out_re = sum_im; out_im = -sum_re; break;
  }
  Quad pref(1);
  for (unsigned j = 0; j < m; ++j)
    pref *= (Quad(2) * qb + Quad(j)) / Quad(j + 1);
  pref = sqrt(pref);
  return {static_cast<double>(out_re * pref), static_cast<double>(out_im * pref)};
}

inline constexpr unsigned kPollaczekSeriesMaxDegree = 30;

/// P_m(x, b). The recursion value is returned; for m <= 30 the hypergeometric
/// series is evaluated as well and both must agree to 1e-8 relative to the
/// local magnitude max(|P_m|, |P_{m-1}|), with an imaginary residue below
/// 1e-10 on the same scale. A disagreement throws NumericalError.
inline double pollaczek(unsigned m, double x, double b)
{
  const auto seq = pollaczek_sequence(m, x, b);
  const double value = seq[m];
  if (m > kPollaczekSeriesMaxDegree) return value;

  const double local = m == 0 ? 1.0 : std::max(std::abs(seq[m]), std::abs(seq[m - 1]));
  const auto series = pollaczek_series(m, x, b);
  if (std::abs(series.imag_residue) > 1e-10 * local)
    throw NumericalError("special_fn", "pollaczek",
                         "series route left imaginary residue " + std::to_string(series.imag_residue));
  if (std::abs(series.value - value) > 1e-8 * local)
    throw NumericalError("special_fn", "pollaczek",
                         "series and recursion disagree at m=" + std::to_string(m) + ": " +
                             std::to_string(series.value) + " vs " + std::to_string(value));
  return value;
}

} // namespace powsq
