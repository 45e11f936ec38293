#pragma once

/**
 * @file spectral.hpp
 * @brief Sturm-sequence bisection for symmetric tridiagonal matrices, the
 *        sector truncations of the Jacobi matrix, and a boundary-modified
 *        family standing in for self-adjoint extensions.
 *
 * All spectra are in the lambda' variable of the recursion.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "powsq/errors.hpp"
#include "powsq/jacobi_core.hpp"

namespace powsq {

/// Real symmetric tridiagonal matrix with strictly positive off-diagonal.
class TridiagonalMatrix {
public:
  TridiagonalMatrix(std::vector<double> diag, std::vector<double> offdiag)
      : diag_(std::move(diag)), offdiag_(std::move(offdiag))
  {
    if (diag_.empty()) throw std::invalid_argument("tridiagonal: dimension must be >= 1");
    if (offdiag_.size() + 1 != diag_.size())
      throw std::invalid_argument("tridiagonal: offdiag must have n-1 entries");
    for (double e : offdiag_)
      if (!(e > 0.0)) throw std::invalid_argument("tridiagonal: offdiag entries must be > 0");
  }

  std::size_t size() const noexcept { return diag_.size(); }
  const std::vector<double>& diag() const noexcept { return diag_; }
  const std::vector<double>& offdiag() const noexcept { return offdiag_; }

  /// Gershgorin interval containing the spectrum.
  std::pair<double, double> gershgorin() const
  {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < diag_.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += offdiag_[i - 1];
      if (i + 1 < diag_.size()) r += offdiag_[i];
      lo = std::min(lo, diag_[i] - r);
      hi = std::max(hi, diag_[i] + r);
    }
    return {lo, hi};
  }

private:
  std::vector<double> diag_;
  std::vector<double> offdiag_;
};

/// n x n leading block of the sector Jacobi matrix (zero diagonal, b_0..b_{n-2}).
inline TridiagonalMatrix truncated_jacobi(const SectorParams& sector, std::size_t n)
{
  if (n < 1) throw std::invalid_argument("truncated_jacobi: n must be >= 1");
  return {std::vector<double>(n, 0.0), off_diagonals(sector, n - 1).values};
}

/// Truncation with the last diagonal entry set to theta * b_{n-1}.
inline TridiagonalMatrix boundary_modified_jacobi(const SectorParams& sector, std::size_t n, double theta)
{
  auto t = truncated_jacobi(sector, n);
  std::vector<double> diag = t.diag();
  diag.back() = theta * off_diagonal(sector, static_cast<std::int64_t>(n - 1));
  return {std::move(diag), t.offdiag()};
}

/// Number of eigenvalues strictly below x: negative pivots of the LDL^T
/// factorization of T - x I. A zero pivot is replaced by -pivmin.
inline std::size_t sturm_count(const TridiagonalMatrix& T, double x)
{
  const auto& d = T.diag();
  const auto& e = T.offdiag();
  double emax = 0.0;
  for (double v : e) emax = std::max(emax, v);
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, emax * emax);

  std::size_t count = 0;
  double q = d[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = (d[i] - x) - e[i - 1] * (e[i - 1] / q);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

struct SpectrumReport {
  std::vector<double> eigenvalues; ///< ascending
  std::size_t n = 0;
  double bisect_tol = 0.0;
  std::optional<double> boundary_theta;
};

namespace detail {

struct Bracket {
  double lo, hi;
  std::size_t count_lo, count_hi;
};

} // namespace detail

/// All eigenvalues to absolute tolerance tol. Intervals with their Sturm
/// counts are split until each holds one eigenvalue, which is then bisected.
/// The stopping width is max(tol, 4 eps |x|) so tiny tol cannot stall.
inline SpectrumReport eigenvalues_bisect(const TridiagonalMatrix& T, double tol)
{
  if (!(tol > 0.0)) throw std::invalid_argument("eigenvalues_bisect: tol must be positive");
  const std::size_t n = T.size();
  auto [lo, hi] = T.gershgorin();
  const double pad = 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)) + tol;
  lo -= pad;
  hi += pad;

  SpectrumReport report;
  report.n = n;
  report.bisect_tol = tol;
  report.eigenvalues.reserve(n);

  const std::size_t c_lo = sturm_count(T, lo);
  const std::size_t c_hi = sturm_count(T, hi);
  if (c_lo != 0 || c_hi != n)
    throw NumericalError("spectral", "eigenvalues_bisect", "Gershgorin bracket does not enclose the spectrum");

  auto width_ok = [tol](double a, double b) {
    return b - a <= std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)));
  };

  // depth-first, lowest interval first, so eigenvalues come out sorted
  std::vector<detail::Bracket> stack{{lo, hi, c_lo, c_hi}};
  while (!stack.empty()) {
    auto br = stack.back();
    stack.pop_back();
    if (br.count_hi == br.count_lo) continue;
    if (width_ok(br.lo, br.hi)) {
      // unresolved cluster narrower than the tolerance
      for (std::size_t j = br.count_lo; j < br.count_hi; ++j) report.eigenvalues.push_back(0.5 * (br.lo + br.hi));
      continue;
    }
    const double mid = 0.5 * (br.lo + br.hi);
    const std::size_t c_mid = sturm_count(T, mid);
    if (c_mid < br.count_lo || c_mid > br.count_hi)
      throw NumericalError("spectral", "eigenvalues_bisect", "non-monotone Sturm count");
    stack.push_back({mid, br.hi, c_mid, br.count_hi});
    stack.push_back({br.lo, mid, br.count_lo, c_mid});
  }
  if (report.eigenvalues.size() != n)
    throw NumericalError("spectral", "eigenvalues_bisect", "lost eigenvalues during bracketing");
  return report;
}

/// One report per theta for the boundary-modified truncation of size n.
inline std::vector<SpectrumReport> extension_sweep(const SectorParams& sector, std::size_t n,
                                                   const std::vector<double>& thetas, double tol)
{
  if (n < 50) throw std::invalid_argument("extension_sweep: n must be >= 50");
  std::vector<SpectrumReport> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    auto report = eigenvalues_bisect(boundary_modified_jacobi(sector, n, theta), tol);
    report.boundary_theta = theta;
    out.push_back(std::move(report));
  }
  return out;
}

/// The `count` eigenvalues of smallest magnitude, ascending. Ties in |x| are
/// broken towards the negative value.
inline std::vector<double> central_eigenvalues(const SpectrumReport& report, std::size_t count)
{
  std::vector<double> ev = report.eigenvalues;
  std::stable_sort(ev.begin(), ev.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  ev.resize(std::min(count, ev.size()));
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// True when the n eigenvalues of `smaller` strictly separate the n+1 of `larger`.
inline bool strictly_interlace(const std::vector<double>& smaller, const std::vector<double>& larger)
{
  if (larger.size() != smaller.size() + 1) return false;
  for (std::size_t i = 0; i < smaller.size(); ++i)
    if (!(larger[i] < smaller[i] && smaller[i] < larger[i + 1])) return false;
  return true;
}

struct SpectrumDiagnostics {
  double min_spacing_near_zero = std::numeric_limits<double>::infinity();
  double cross_min_gap = std::numeric_limits<double>::infinity();
  /// one flag per consecutive report pair whose sizes differ by exactly 1
  std::vector<bool> interlacing;
};

/// Summary statistics over the central eigenvalues of each report: those with
/// |x| <= window, further limited to the max_central of smallest magnitude.
/// cross_min_gap is the smallest distance between central eigenvalues of any
/// two different reports.
inline SpectrumDiagnostics spectrum_diagnostics(const std::vector<SpectrumReport>& reports, double window,
                                                std::size_t max_central = std::numeric_limits<std::size_t>::max())
{
  if (reports.size() < 2) throw std::invalid_argument("spectrum_diagnostics: need at least two reports");
  std::vector<std::vector<double>> central;
  for (const auto& r : reports) {
    std::vector<double> c;
    for (double x : central_eigenvalues(r, r.eigenvalues.size()))
      if (std::abs(x) <= window) c.push_back(x);
    central.push_back(central_eigenvalues(SpectrumReport{c, c.size(), r.bisect_tol, {}}, max_central));
  }

  SpectrumDiagnostics out;
  for (const auto& c : central)
    for (std::size_t i = 1; i < c.size(); ++i) out.min_spacing_near_zero = std::min(out.min_spacing_near_zero, c[i] - c[i - 1]);
  for (std::size_t a = 0; a < central.size(); ++a)
    for (std::size_t b = a + 1; b < central.size(); ++b)
      for (double x : central[a])
        for (double y : central[b]) out.cross_min_gap = std::min(out.cross_min_gap, std::abs(x - y));
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& p = reports[i - 1];
    const auto& q = reports[i];
    if (q.n == p.n + 1) out.interlacing.push_back(strictly_interlace(p.eigenvalues, q.eigenvalues));
    else if (p.n == q.n + 1) out.interlacing.push_back(strictly_interlace(q.eigenvalues, p.eigenvalues));
  }
  return out;
}

} // namespace powsq
