#pragma once

/**
 * @file quadrature_moments.hpp
 * @brief Integration against the Pollaczek weight rho_b, Hamburger moments,
 *        Hankel positivity, moments -> Jacobi coefficients, and the
 *        determined / limit-circle classifier for the sector Jacobi matrices.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "powsq/detail/eft.hpp"
#include "powsq/errors.hpp"
#include "powsq/jacobi_core.hpp"
#include "powsq/special_fn.hpp"

namespace powsq {

namespace detail {

inline constexpr std::size_t kGaussPoints = 20;

struct GaussRule {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
inline const GaussRule& gauss_legendre()
{
  static const GaussRule rule = [] {
    GaussRule r;
    constexpr std::size_t n = kGaussPoints;
    for (std::size_t i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (std::size_t j = 2; j <= n; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

// Upper incomplete gamma bound: Gamma(s, y) <= y^(s-1) e^-y / (1 - (s-1)/y), y > s - 1.
inline double upper_gamma_bound(double s, double y)
{
  const double lead = std::exp((s - 1.0) * std::log(y) - y);
  if (s <= 1.0) return lead;
  if (y <= s - 1.0) return std::numeric_limits<double>::infinity();
  return lead / (1.0 - (s - 1.0) / y);
}

} // namespace detail

/// Growth bound for the integrand: |f(x)| <= A (1 + |x|)^degree.
struct IntegrandBound {
  unsigned degree = 0;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   ///< |last refinement difference| + tail bound + rounding floor
  double cutoff = 0.0;  ///< X; the integral runs over [-X, X]
  std::size_t panels = 0;
};

inline constexpr std::size_t kMaxPanels = std::size_t{1} << 15;

/// Integral of f(x) rho_b(x) over the real line to absolute tolerance tol.
///
/// The cutoff X is grown until the analytic tail bound
///   rho_b(x) <= 2 * 2^(2b-1) 2pi x^(2b-1) e^(-pi x) / (pi Gamma(2b)),  x >= 8,
/// integrated against the sampled amplitude of f is below tol/2. Then
/// composite 20-point Gauss-Legendre panels on [-X, X] are doubled until two
/// successive estimates differ by less than max(tol/2, 64 eps int|f| rho).
template <typename F>
QuadResult integrate_weighted(F&& f, double b, IntegrandBound bound, double tol)
{
  if (!(b > 0.0)) throw std::domain_error("integrate_weighted: b must be positive");
  if (!(tol > 0.0)) throw std::domain_error("integrate_weighted: tol must be positive");
  const double d = bound.degree;
  const double envelope_const =
      2.0 * std::exp((2.0 * b - 1.0) * std::numbers::ln2 + std::log(2.0) - log_gamma({2.0 * b, 0.0}).real());

  auto amplitude = [&](double X) {
    double a = 0.0;
    for (double s : {1.0, 1.5, 2.0}) {
      const double x = s * X;
      const double scale = std::pow(1.0 + x, d);
      a = std::max({a, std::abs(f(x)) / scale, std::abs(f(-x)) / scale});
    }
    return 2.0 * a;
  };
  auto tail = [&](double X) {
    // two tails, |f| <= A (2x)^d for x >= 1
    const double p = d + 2.0 * b - 1.0;
    const double integral = detail::upper_gamma_bound(p + 1.0, std::numbers::pi * X) /
                            std::pow(std::numbers::pi, p + 1.0);
    return 2.0 * amplitude(X) * envelope_const * std::pow(2.0, d) * integral;
  };

  double X = 8.0;
  double tail_bound = tail(X);
  while (tail_bound >= tol / 2.0) {
    X *= 1.25;
    tail_bound = tail(X);
    if (X > 1e4)
      throw NumericalError("quadrature_moments", "integrate_weighted", "tail cutoff exceeds 1e4");
  }

  const auto& rule = detail::gauss_legendre();
  auto estimate = [&](std::size_t panels, double& abs_integral) {
    detail::CompensatedSum sum, abs_sum;
    const double h = 2.0 * X / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = -X + (p + 0.5) * h;
      for (std::size_t i = 0; i < detail::kGaussPoints; ++i) {
        const double x = mid + 0.5 * h * rule.nodes[i];
        const double w = 0.5 * h * rule.weights[i] * weight_rho(b, x);
        const double fx = f(x);
        sum.add(w * fx);
        abs_sum.add(w * std::abs(fx));
      }
    }
    abs_integral = abs_sum.value();
    return sum.value();
  };

  std::size_t panels = 32;
  double abs_integral = 0.0;
  double previous = estimate(panels, abs_integral);
  for (;;) {
    panels *= 2;
    const double current = estimate(panels, abs_integral);
    const double diff = std::abs(current - previous);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs_integral;
    if (diff < std::max(tol / 2.0, floor))
      return {current, diff + tail_bound + floor, X, panels};
    if (panels >= kMaxPanels)
      throw NumericalError("quadrature_moments", "integrate_weighted",
                           "no convergence at " + std::to_string(panels) + " panels; last estimates " +
                               std::to_string(previous) + ", " + std::to_string(current));
    previous = current;
  }
}

// ---------------------------------------------------------------------------
// moments and Hankel matrices

struct MomentSequence {
  double b = 0.0;
  std::vector<double> values;     ///< s_0 .. s_n
  std::vector<double> quad_error; ///< absolute error estimate per moment

  std::size_t size() const noexcept { return values.size(); }
};

inline constexpr std::size_t kMaxMomentOrder = 24;

/// s_m = int x^m rho_b(x) dx for m = 0..up_to.
inline MomentSequence moments(double b, std::size_t up_to, double tol)
{
  if (up_to > kMaxMomentOrder)
    throw std::domain_error("moments: up_to must be <= 24, got " + std::to_string(up_to));
  MomentSequence out{b, {}, {}};
  for (std::size_t m = 0; m <= up_to; ++m) {
    const auto r = integrate_weighted([m](double x) { return std::pow(x, static_cast<double>(m)); }, b,
                                      IntegrandBound{static_cast<unsigned>(m)}, tol);
    out.values.push_back(r.value);
    out.quad_error.push_back(r.error);
  }
  return out;
}

/// Moment sequence with no quadrature error (test inputs, exact measures).
inline MomentSequence exact_moments(std::vector<double> values)
{
  MomentSequence out;
  out.quad_error.assign(values.size(), 0.0);
  out.values = std::move(values);
  return out;
}

struct HankelCheck {
  bool positive = false;
  std::optional<std::size_t> failing_order; ///< size r of the first [s_{i+j}]_{i,j<r} that is not positive definite
  std::size_t checked_order = 0;            ///< largest size examined, floor(n/2) + 1
};

/// Positive definiteness of the Hankel matrices of increasing size. A pivot of
/// the LDL^T factorization must exceed the moment error budget of its block
/// (4 r max quadError + 32 eps max s_{2i}) to count as positive. Failure at
/// size r implies failure at all larger sizes.
inline HankelCheck hankel_positive(const MomentSequence& s)
{
  HankelCheck out;
  if (s.size() == 0) return out;
  const std::size_t order = (s.size() - 1) / 2 + 1;
  out.checked_order = order;

  using Real = long double;
  std::vector<Real> L(order * order, 0.0L), D(order, 0.0L);
  double max_err = 0.0, max_diag = 0.0;
  for (std::size_t r = 0; r < order; ++r) {
    for (std::size_t j = 0; j <= 2 * r && j < s.size(); ++j) max_err = std::max(max_err, s.quad_error[j]);
    max_diag = std::max(max_diag, std::abs(s.values[2 * r]));
    // row r of L and pivot D[r]
    for (std::size_t j = 0; j < r; ++j) {
      Real v = s.values[r + j];
      for (std::size_t q = 0; q < j; ++q) v -= L[r * order + q] * L[j * order + q] * D[q];
      L[r * order + j] = v / D[j];
    }
    Real pivot = s.values[2 * r];
    for (std::size_t q = 0; q < r; ++q) pivot -= L[r * order + q] * L[r * order + q] * D[q];
    D[r] = pivot;
    L[r * order + r] = 1.0L;
    const double budget =
        4.0 * static_cast<double>(r + 1) * max_err + 32.0 * std::numeric_limits<double>::epsilon() * max_diag;
    if (!(static_cast<double>(pivot) > budget)) {
      out.failing_order = r + 1;
      return out;
    }
  }
  out.positive = true;
  return out;
}

/// Recurrence coefficients x p_j = c_{j+1} p_{j+1} + a_j p_j + c_j p_{j-1}
/// of the orthonormal polynomials of a measure.
struct JacobiCoefficients {
  std::vector<double> diag;    ///< a_0 .. a_n
  std::vector<double> offdiag; ///< c_1 .. c_n (offdiag[j-1] = c_j)
};

/// Hankel breakdown: no orthonormal polynomial of this degree exists in
/// working precision. Carries the coefficients computed before the breakdown.
class HankelBreakdown : public NumericalError {
public:
  HankelBreakdown(std::size_t degree, JacobiCoefficients partial)
      : NumericalError("quadrature_moments", "moments_to_jacobi",
                       "Hankel factorization breaks down at degree " + std::to_string(degree)),
        degree_(degree), partial_(std::move(partial))
  {
  }
  std::size_t degree() const noexcept { return degree_; }
  const JacobiCoefficients& partial() const noexcept { return partial_; }

private:
  std::size_t degree_;
  JacobiCoefficients partial_;
};

inline constexpr std::size_t kMaxHankelJacobiOrder = 8;

/// Recurrence coefficients from moments by Cholesky H = R^T R of the Hankel
/// matrix of size n + 2 (Golub-Welsch):
///   a_j = r_{j,j+1}/r_{j,j} - r_{j-1,j}/r_{j-1,j-1},  c_j = r_{j,j}/r_{j-1,j-1}.
/// Needs s_0 .. s_{2n+2}. Factorization runs in long double; the Hankel
/// condition number grows exponentially, so n is capped at 8.
inline JacobiCoefficients moments_to_jacobi(const MomentSequence& s, std::size_t n)
{
  if (n > kMaxHankelJacobiOrder) throw std::domain_error("moments_to_jacobi: n must be <= 8");
  const std::size_t size = n + 2;
  if (s.size() < 2 * size - 1)
    throw std::invalid_argument("moments_to_jacobi: need moments through s_" + std::to_string(2 * size - 2));

  using Real = long double;
  std::vector<Real> R(size * size, 0.0L); // upper triangular, row-major
  JacobiCoefficients out;
  auto r = [&](std::size_t i, std::size_t j) -> Real& { return R[i * size + j]; };

  for (std::size_t i = 0; i < size; ++i) {
    Real d = s.values[2 * i];
    for (std::size_t q = 0; q < i; ++q) d -= r(q, i) * r(q, i);
    const Real scale = std::abs(static_cast<Real>(s.values[2 * i]));
    if (!(d > 64.0L * std::numeric_limits<double>::epsilon() * scale)) throw HankelBreakdown(i, out);
    r(i, i) = std::sqrt(d);
    for (std::size_t j = i + 1; j < size; ++j) {
      Real v = s.values[i + j];
      for (std::size_t q = 0; q < i; ++q) v -= r(q, i) * r(q, j);
      r(i, j) = v / r(i, i);
    }
    if (i >= 1) {
      out.offdiag.push_back(static_cast<double>(r(i, i) / r(i - 1, i - 1)));
    }
    // a_i needs r(i, i+1)
    if (i + 1 < size) {
      Real a = r(i, i + 1) / r(i, i);
      if (i >= 1) a -= r(i - 1, i) / r(i - 1, i - 1);
      out.diag.push_back(static_cast<double>(a));
    }
  }
  out.offdiag.resize(n);
  return out;
}

// ---------------------------------------------------------------------------
// determinacy

enum class Determinacy { Determined, LimitCircle };

inline const char* to_string(Determinacy d)
{
  return d == Determinacy::Determined ? "determined" : "limit_circle";
}

/// Certificates for the type D / type C classification of a sector.
///
/// For k <= 2 the partial sum of 1/b_m is checked against the integral lower
/// bound from b_m <= ((m+1)k)^(k/2); that bound is a divergent series, so it
/// certifies sum 1/b_m = infinity. For k >= 3 the tail beyond M is bounded by
/// the integral of (x k)^(-k/2) from b_m >= (mk)^(k/2).
struct DeterminacyVerdict {
  int k = 0;
  int kappa = 0;
  std::size_t M = 0;
  Determinacy verdict = Determinacy::Determined;
  double partial_sum = 0.0;  ///< sum_{m=0}^{M} 1/b_m
  double lower_bound = 0.0;  ///< analytic lower bound of the partial sum
  double tail_bound = std::numeric_limits<double>::infinity(); ///< bound on sum_{m>M} 1/b_m (finite iff convergent)
  bool divergence_certified = false;
  bool convergence_certified = false;
  std::optional<std::size_t> log_concave_from; ///< m0: b_{m-1} b_{m+1} <= b_m^2 for all m in [m0, M]
};

inline DeterminacyVerdict classify_determinacy(int k, int kappa, std::size_t M)
{
  const SectorParams sector{k, kappa};
  if (M < 1000) throw std::invalid_argument("classify_determinacy: M must be >= 1000");
  DeterminacyVerdict v;
  v.k = k;
  v.kappa = kappa;
  v.M = M;

  const auto b = off_diagonals(sector, M + 2);
  const double kk = k;
  const double p = kk / 2.0;
  detail::CompensatedSum sum;
  bool b_bound_ok = true;
  for (std::size_t m = 0; m <= M; ++m) {
    sum.add(1.0 / b[m]);
    if (m >= 1 && b[m] < std::pow(static_cast<double>(m) * kk, p) * (1.0 - 1e-14)) b_bound_ok = false;
  }
  v.partial_sum = sum.value();

  // sum_{m=0}^{M} ((m+1)k)^-p >= int_1^{M+2} (x k)^-p dx
  const double X = static_cast<double>(M) + 2.0;
  v.lower_bound = p == 1.0 ? std::log(X) / kk
                           : std::pow(kk, -p) * (std::pow(X, 1.0 - p) - 1.0) / (1.0 - p);
  if (k <= 2) {
    v.divergence_certified = v.partial_sum >= v.lower_bound * (1.0 - 1e-12);
  } else {
    v.tail_bound = std::pow(kk, -p) * std::pow(static_cast<double>(M), 1.0 - p) / (p - 1.0);
    v.convergence_certified = b_bound_ok && std::isfinite(v.tail_bound);
  }

  // b_{m-1} b_{m+1} <= b_m^2  <=>  sum_p log(1 - k^2 / x_p^2) <= 0, x_p = mk + kappa + 1 + p
  std::optional<std::size_t> m0;
  for (std::size_t m = M; m >= 1; --m) {
    long double log_ratio = 0.0L;
    for (int q = 0; q < k; ++q) {
      const long double x = static_cast<long double>(sector.level(static_cast<std::int64_t>(m)) + 1 + q);
      log_ratio += std::log1p(-(kk * kk) / (x * x));
    }
    if (log_ratio > 0.0L) break;
    m0 = m;
  }
  v.log_concave_from = m0;

  if (v.divergence_certified) {
    v.verdict = Determinacy::Determined;
  } else if (v.convergence_certified && v.log_concave_from) {
    v.verdict = Determinacy::LimitCircle;
  } else {
    throw NumericalError("quadrature_moments", "classify_determinacy",
                         "no certificate for k=" + std::to_string(k));
  }
  return v;
}

} // namespace powsq
