#pragma once

/**
 * @file states.hpp
 * @brief k-th power amplitude-squeezed states in the photon-number basis.
 *
 * A state with parameters (nu, lambda) in sector (k, kappa) solves
 *
 *     (mu a^k + nu a^{+k}) |psi> = lambda |psi>,   mu = sqrt(1 + |nu|^2),
 *
 * and is built as c_m ~ t^m f_m(lambda') over |mk + kappa>, where t is the
 * principal square root of nu/mu, lambda' = lambda / (mu t) and f_m is the
 * polynomial solution of the sector recursion. Such states are exactly the
 * equality cases of the Schroedinger-Robertson relation for A = Re a^k,
 * B = Im a^k.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "powsq/errors.hpp"
#include "powsq/jacobi_core.hpp"

namespace powsq {

class SqueezeParams {
public:
  SqueezeParams(SectorParams sector, cplx nu, cplx lambda)
      : sector_(sector), nu_(nu), mu_(std::sqrt(1.0 + std::norm(nu))), lambda_(lambda)
  {
  }

  const SectorParams& sector() const noexcept { return sector_; }
  cplx nu() const noexcept { return nu_; }
  double mu() const noexcept { return mu_; }
  cplx lambda() const noexcept { return lambda_; }

  /// Principal square root of nu/mu.
  cplx t() const { return std::sqrt(nu_ / mu_); }
  /// lambda / (mu t), the spectral parameter of the recursion.
  cplx lambda_prime() const { return lambda_ / (mu_ * t()); }

private:
  SectorParams sector_;
  cplx nu_;
  double mu_;
  cplx lambda_;
};

/// Truncated state over the sector basis |mk + kappa>, m = 0..cutoff().
struct FockVector {
  SectorParams sector;
  std::vector<cplx> coefficients;
  double tail_estimate = 0.0; ///< sum |c_m|^2 over the final 10% of slots

  std::size_t cutoff() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }

  double norm() const
  {
    detail::CompensatedSum s;
    for (const auto& c : coefficients) s.add(std::norm(c));
    return std::sqrt(s.value());
  }
};

namespace detail {

inline double trailing_tail(const std::vector<cplx>& c)
{
  const std::size_t start = c.size() - std::max<std::size_t>(1, c.size() / 10);
  CompensatedSum s;
  for (std::size_t m = start; m < c.size(); ++m) s.add(std::norm(c[m]));
  return s.value();
}

// Number of top slots left out of operator products (the bandwidth 2k).
inline std::size_t edge_slots(const SectorParams& sector) { return 2 * static_cast<std::size_t>(sector.k()); }

} // namespace detail

inline constexpr std::size_t kMaxStateCutoff = 100000;

/// Unit basis vector |mk + kappa> padded with 2k zero slots so that edge-slot
/// exclusion in expectation values leaves it intact.
inline FockVector basis_vector(const SectorParams& sector, std::size_t m)
{
  FockVector v{sector, std::vector<cplx>(m + 1 + detail::edge_slots(sector)), 0.0};
  v.coefficients[m] = 1.0;
  return v;
}

/// Normalized eigenstate of mu a^k + nu a^{+k} (nu != 0). The cutoff doubles
/// from 64 until the trailing-10% weight drops below tol; c_0 is real positive.
inline FockVector build_state(const SqueezeParams& params, double tol)
{
  if (params.nu() == cplx{}) throw std::invalid_argument("build_state: nu = 0, use build_power_coherent");
  if (!(tol > 0.0 && tol <= 1e-4)) throw std::invalid_argument("build_state: tol must lie in (0, 1e-4]");

  const cplx t = params.t();
  const double log_t = std::log(std::abs(t));
  const double t_arg = std::arg(t);
  const cplx lp = params.lambda_prime();

  double achieved = 1.0;
  for (std::size_t M = 64; M <= kMaxStateCutoff; M *= 2) {
    const auto sol = solve_recursion(params.sector(), lp, M, InitialKind::Polynomial);
    std::vector<double> logc(M + 1);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m <= M; ++m) {
      logc[m] = static_cast<double>(m) * log_t + sol.log_abs(m);
      peak = std::max(peak, logc[m]);
    }
    std::vector<cplx> c(M + 1);
    for (std::size_t m = 0; m <= M; ++m) {
      if (logc[m] == -std::numeric_limits<double>::infinity()) continue;
      c[m] = std::polar(std::exp(logc[m] - peak), static_cast<double>(m) * t_arg) * sol.direction(m);
    }
    FockVector v{params.sector(), std::move(c), 0.0};
    const double nrm = v.norm();
    for (auto& x : v.coefficients) x /= nrm;
    v.tail_estimate = detail::trailing_tail(v.coefficients);
    achieved = v.tail_estimate;
    if (achieved < tol) return v;
  }
  throw NumericalError("states", "build_state",
                       "tail " + std::to_string(achieved) + " above tol at cutoff " + std::to_string(kMaxStateCutoff));
}

/// Normalized eigenstate of a^k (nu = 0, mu = 1): c_{m+1} = lambda c_m / b_m.
/// Coefficients are generated until they are negligible (relative weight
/// below 1e-34 once |lambda| < b_m / 2), then 2k zero slots are appended.
inline FockVector build_power_coherent(const SectorParams& sector, cplx lambda)
{
  std::vector<cplx> c{1.0};
  double total = 1.0;
  for (std::size_t m = 0;; ++m) {
    const double b = off_diagonal(sector, static_cast<std::int64_t>(m));
    const cplx next = lambda * c.back() / b;
    if (std::abs(lambda) < 0.5 * b && std::norm(next) < 1e-34 * total) break;
    c.push_back(next);
    total += std::norm(next);
    if (c.size() > kMaxStateCutoff)
      throw NumericalError("states", "build_power_coherent", "cutoff exceeded");
  }
  c.resize(c.size() + detail::edge_slots(sector));
  FockVector v{sector, std::move(c), 0.0};
  const double nrm = v.norm();
  for (auto& x : v.coefficients) x /= nrm;
  v.tail_estimate = detail::trailing_tail(v.coefficients);
  return v;
}

/// a^k v (unnormalized): out_m = b_m c_{m+1}; the top slot becomes 0.
inline FockVector apply_power_lowering(const FockVector& v)
{
  FockVector out{v.sector, std::vector<cplx>(v.coefficients.size()), 0.0};
  for (std::size_t m = 0; m + 1 < v.coefficients.size(); ++m)
    out.coefficients[m] = off_diagonal(v.sector, static_cast<std::int64_t>(m)) * v.coefficients[m + 1];
  return out;
}

/// a^{+k} v (unnormalized): out_{m+1} = b_m c_m, one extra slot.
inline FockVector apply_power_raising(const FockVector& v)
{
  FockVector out{v.sector, std::vector<cplx>(v.coefficients.size() + 1), 0.0};
  for (std::size_t m = 0; m < v.coefficients.size(); ++m)
    out.coefficients[m + 1] = off_diagonal(v.sector, static_cast<std::int64_t>(m)) * v.coefficients[m];
  return out;
}

struct SrReport {
  double var_a = 0.0;
  double var_b = 0.0;
  double cov_ab = 0.0;
  cplx commutator_expectation{};   ///< <[A, B]> = (i/2) <f_k(N)>
  double commutator_direct = 0.0;  ///< Im <[A, B]> from the ladder products
  double lhs = 0.0;                ///< var_a var_b - cov_ab^2
  double rhs = 0.0;                ///< |<[A, B]>|^2 / 4
  double gap = 0.0;                ///< lhs - rhs
};

/// Schroedinger-Robertson quantities for A = (a^k + a^{+k})/2 and
/// B = (a^k - a^{+k})/2i. The top 2k slots are dropped and the vector
/// renormalized; the remaining finite vector is then handled exactly. The
/// commutator is computed from f_k(N) and from the products, which must agree
/// to 1e-8 relative.
inline SrReport sr_report(const FockVector& v)
{
  const std::size_t keep = v.coefficients.size() > detail::edge_slots(v.sector)
                               ? v.coefficients.size() - detail::edge_slots(v.sector)
                               : 0;
  FockVector w{v.sector, std::vector<cplx>(v.coefficients.begin(), v.coefficients.begin() + keep), 0.0};
  const double nrm = w.norm();
  if (nrm == 0.0) throw NumericalError("states", "sr_report", "vector vanishes after edge-slot exclusion");
  for (auto& x : w.coefficients) x /= nrm;

  const auto low = apply_power_lowering(w);
  const auto up = apply_power_raising(w);
  const std::size_t len = up.coefficients.size();
  auto at = [](const FockVector& x, std::size_t m) { return m < x.coefficients.size() ? x.coefficients[m] : cplx{}; };

  std::vector<cplx> av(len), bv(len);
  const cplx two_i{0.0, 2.0};
  for (std::size_t m = 0; m < len; ++m) {
    av[m] = 0.5 * (at(low, m) + at(up, m));
    bv[m] = (at(low, m) - at(up, m)) / two_i;
  }
  auto inner = [&](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    detail::CompensatedSum re, im;
    for (std::size_t m = 0; m < len; ++m) {
      const cplx p = std::conj(x[m]) * y[m];
      re.add(p.real());
      im.add(p.imag());
    }
    return cplx{re.value(), im.value()};
  };
  std::vector<cplx> wv(len);
  for (std::size_t m = 0; m < w.coefficients.size(); ++m) wv[m] = w.coefficients[m];
  const double mean_a = inner(wv, av).real();
  const double mean_b = inner(wv, bv).real();
  for (std::size_t m = 0; m < len; ++m) {
    av[m] -= mean_a * wv[m];
    bv[m] -= mean_b * wv[m];
  }

  SrReport r;
  r.var_a = inner(av, av).real();
  r.var_b = inner(bv, bv).real();
  const cplx z = inner(av, bv);
  r.cov_ab = z.real();
  r.commutator_direct = 2.0 * z.imag();

  detail::CompensatedSum fk;
  for (std::size_t m = 0; m < w.coefficients.size(); ++m) {
    const auto n = static_cast<std::uint64_t>(v.sector.level(static_cast<std::int64_t>(m)));
    fk.add(std::norm(w.coefficients[m]) * static_cast<double>(commutator_weight_ld(v.sector.k(), n)));
  }
  const double half_fk = 0.5 * fk.value();
  r.commutator_expectation = {0.0, half_fk};
  if (std::abs(r.commutator_direct - half_fk) > 1e-8 * half_fk)
    throw NumericalError("states", "sr_report",
                         "commutator routes disagree: " + std::to_string(r.commutator_direct) + " vs " +
                             std::to_string(half_fk));

  r.lhs = r.var_a * r.var_b - r.cov_ab * r.cov_ab;
  r.rhs = 0.25 * half_fk * half_fk;
  r.gap = r.lhs - r.rhs;
  return r;
}

/// ||(mu a^k + nu a^{+k} - lambda) v|| / (|lambda| ||v|| + ||mu a^k v|| + ||nu a^{+k} v||),
/// all norms over slots 0..cutoff-2k. The two ladder terms are measured
/// separately so that lambda = 0 states (where they cancel) stay well scaled.
inline double residual_check(const FockVector& v, const SqueezeParams& params)
{
  if (!(v.sector == params.sector())) throw std::invalid_argument("residual_check: sector mismatch");
  const auto& c = v.coefficients;
  const std::size_t edge = detail::edge_slots(v.sector);
  if (c.size() <= edge) return 0.0;
  const std::size_t last = c.size() - 1 - edge;
  detail::CompensatedSum res, low, up, vec;
  for (std::size_t m = 0; m <= last; ++m) {
    const cplx lowered = params.mu() * off_diagonal(v.sector, static_cast<std::int64_t>(m)) * c[m + 1];
    const cplx raised =
        m > 0 ? params.nu() * off_diagonal(v.sector, static_cast<std::int64_t>(m - 1)) * c[m - 1] : cplx{};
    res.add(std::norm(lowered + raised - params.lambda() * c[m]));
    low.add(std::norm(lowered));
    up.add(std::norm(raised));
    vec.add(std::norm(c[m]));
  }
  const double denom =
      std::abs(params.lambda()) * std::sqrt(vec.value()) + std::sqrt(low.value()) + std::sqrt(up.value());
  return denom == 0.0 ? 0.0 : std::sqrt(res.value()) / denom;
}

// ---------------------------------------------------------------------------
// deficiency evidence

enum class Summability { SquareSummable, NotSquareSummable, Inconclusive };

inline const char* to_string(Summability s)
{
  switch (s) {
  case Summability::SquareSummable: return "square_summable";
  case Summability::NotSquareSummable: return "not_square_summable";
  case Summability::Inconclusive: return "inconclusive";
  }
  return "?";
}

inline constexpr double kExponentMargin = 0.1;
inline constexpr double kCauchyWindow = 0.1;

struct SolutionEvidence {
  InitialKind kind = InitialKind::Polynomial;
  GrowthProfile profile;
  double cauchy_ratio = 0.0; ///< (S_M - S_{M/2}) / S_M
  Summability verdict = Summability::Inconclusive;
};

/// Square-summable: envelope exponent < -1/2 - 0.1 and S_{M/2} within 10% of S_M.
/// Not square-summable: exponent > -1/2 + 0.1, or the partial sums are not Cauchy
/// while the exponent is below. Anything else, or a rejected fit, is inconclusive.
inline SolutionEvidence classify_solution(const RecursionSolution& sol)
{
  SolutionEvidence ev;
  ev.kind = sol.kind();
  ev.profile = growth_profile(sol);
  const std::size_t M = sol.cutoff();
  const double log_full = ev.profile.log_partial_sum(M);
  const double log_half = ev.profile.log_partial_sum(M / 2);
  ev.cauchy_ratio = -std::expm1(log_half - log_full);
  if (!ev.profile.fit_ok) return ev;
  const double e = ev.profile.exponent;
  const bool cauchy = ev.cauchy_ratio <= kCauchyWindow;
  if (e < -0.5 - kExponentMargin && cauchy) ev.verdict = Summability::SquareSummable;
  else if (e > -0.5 + kExponentMargin) ev.verdict = Summability::NotSquareSummable;
  return ev;
}

struct DeficiencyEvidence {
  SectorParams sector;
  std::size_t M = 0;
  std::optional<int> count; ///< dimension of the square-summable solution space at lambda' = i; empty = inconclusive
  SolutionEvidence polynomial;
  SolutionEvidence second;
  std::optional<SolutionEvidence> minimal; ///< only when neither fundamental solution is square-summable
};

/// Weyl alternative at lambda' = i. Both fundamental solutions square-summable
/// gives 2; exactly one gives 1; neither gives 1 or 0 according to the
/// backward-recursion (minimal) solution.
inline DeficiencyEvidence deficiency_evidence(const SectorParams& sector, std::size_t M)
{
  if (M < 5000) throw std::invalid_argument("deficiency_evidence: M must be >= 5000");
  const cplx i{0.0, 1.0};
  DeficiencyEvidence out{sector, M, std::nullopt, {}, {}, std::nullopt};
  out.polynomial = classify_solution(solve_recursion(sector, i, M, InitialKind::Polynomial));
  out.second = classify_solution(solve_recursion(sector, i, M, InitialKind::Second));

  const auto p = out.polynomial.verdict;
  const auto q = out.second.verdict;
  using S = Summability;
  if (p == S::Inconclusive || q == S::Inconclusive) return out;
  if (p == S::SquareSummable && q == S::SquareSummable) {
    out.count = 2;
  } else if (p == S::SquareSummable || q == S::SquareSummable) {
    out.count = 1;
  } else {
    out.minimal = classify_solution(minimal_solution(sector, i, M));
    if (out.minimal->verdict == S::SquareSummable) out.count = 1;
    else if (out.minimal->verdict == S::NotSquareSummable) out.count = 0;
  }
  return out;
}

} // namespace powsq
