// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "powsq/powsq.hpp"

using namespace powsq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_err(cplx a, cplx b)
{
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

double nearest(double x, const std::vector<double>& values)
{
  double d = std::numeric_limits<double>::infinity();
  for (double y : values) d = std::min(d, std::abs(x - y));
  return d;
}

// largest distance from a central eigenvalue of `a` to the spectrum of `b`
double central_shift(const SpectrumReport& a, const SpectrumReport& b)
{
  double s = 0.0;
  for (double x : central_eigenvalues(a, 5)) s = std::max(s, nearest(x, b.eigenvalues));
  return s;
}

Outcome pollaczek_identity()
{
  double worst = 0.0;
  for (int kappa : {0, 1})
    for (double ell : {0.0, 0.5, -0.5, 2.0, -2.0}) {
      const double b = kappa == 0 ? 0.25 : 0.75;
      const auto sol = solve_recursion({2, kappa}, 4.0 * ell, 30, InitialKind::Polynomial);
      for (unsigned m = 0; m <= 30; ++m) worst = std::max(worst, rel_err(sol.value(m), pollaczek_series(m, ell, b).value));
    }
  return {worst <= 1e-9, "max rel err " + fmt(worst) + " (tol 1e-9)"};
}

Outcome hermite_identity()
{
  const double worst = std::max(hermite_identity_check(0.6, 20).max_deviation,
                                hermite_identity_check(-1.3, 20).max_deviation);
  return {worst <= 1e-10, "max rel err " + fmt(worst) + " (tol 1e-10)"};
}

Outcome orthonormality()
{
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double b : {0.25, 0.75})
    for (unsigned m = 0; m <= 10; ++m)
      for (unsigned n = m; n <= 10; ++n) {
        const auto r = integrate_weighted(
            [&](double x) {
              const auto p = pollaczek_sequence(n, x, b);
              return p[m] * p[n];
            },
            b, IntegrandBound{m + n}, 1e-10);
        worst = std::max(worst, std::abs(r.value - (m == n ? 1.0 : 0.0)));
      }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-8 && secs <= 30.0, "max |<P_m,P_n> - delta| " + fmt(worst) + " (tol 1e-8), " + fmt(secs) + " s (limit 30 s)"};
}

Outcome moment_roundtrip()
{
  double off = 0.0, diag = 0.0;
  for (int kappa : {0, 1}) {
    const auto s = moments(kappa == 0 ? 0.25 : 0.75, 18, 1e-12);
    if (!hankel_positive(s).positive) return {false, "Hankel matrix not positive for kappa=" + std::to_string(kappa)};
    const auto J = moments_to_jacobi(s, 8);
    for (std::size_t m = 1; m <= 8; ++m)
      off = std::max(off, std::abs(J.offdiag[m - 1] - off_diagonal({2, kappa}, static_cast<std::int64_t>(m - 1)) / 4.0));
    for (double a : J.diag) diag = std::max(diag, std::abs(a));
  }
  return {off <= 1e-6 && diag <= 1e-6, "max offdiag err " + fmt(off) + ", max |diag| " + fmt(diag) + " (tol 1e-6)"};
}

Outcome determinacy()
{
  bool ok = true;
  std::string detail;
  for (int k = 1; k <= 5; ++k) {
    const Determinacy expected = k <= 2 ? Determinacy::Determined : Determinacy::LimitCircle;
    std::optional<Determinacy> seen;
    for (std::size_t M : {1000u, 10000u}) {
      const auto v = classify_determinacy(k, 0, M);
      const bool certified = k <= 2 ? v.divergence_certified
                                    : v.convergence_certified && std::isfinite(v.tail_bound) && v.log_concave_from.has_value();
      ok = ok && v.verdict == expected && certified && (!seen || *seen == v.verdict);
      seen = v.verdict;
    }
    detail += (k > 1 ? ", " : "") + std::string("k=") + std::to_string(k) + " " + to_string(*seen);
  }
  return {ok, detail + " (M = 1e3, 1e4)"};
}

Outcome deficiency()
{
  bool ok = true;
  std::string detail;
  for (const auto& [k, expected] : std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 2}}) {
    const auto ev = deficiency_evidence({k, 0}, 5000);
    ok = ok && ev.count && *ev.count == expected;
    detail += "k=" + std::to_string(k) + " count " + (ev.count ? std::to_string(*ev.count) : "?") + "; ";
    if (k == 3) {
      const double e = ev.polynomial.profile.exponent;
      ok = ok && std::abs(e + 0.75) <= 0.1;
      detail += "k=3 exponent " + fmt(e) + " (target -0.75 +- 0.1)";
    }
  }
  return {ok, detail};
}

Outcome sr_equality()
{
  struct Case {
    int k;
    cplx nu, lambda;
  };
  double worst = 0.0;
  for (const auto& c : {Case{1, 0.3, {1, 1}}, Case{2, {0, 0.5}, {1, 1}}, Case{3, 0.3, 0.0}, Case{3, 0.3, {1, 1}}}) {
    const auto r = sr_report(build_state(SqueezeParams({c.k, 0}, c.nu, c.lambda), 1e-12));
    worst = std::max(worst, std::abs(r.gap) / r.rhs);
  }
  const double control = sr_report(basis_vector({1, 0}, 1)).gap;
  return {worst <= 1e-6 && std::abs(control - 0.5) <= 1e-10,
          "max gap/rhs " + fmt(worst) + " (tol 1e-6), |1> gap - 1/2 = " + fmt(control - 0.5) + " (tol 1e-10)"};
}

Outcome eigenvalue_consistency()
{
  const SectorParams sec{3, 0};
  const std::size_t n = 12;
  const auto ev = eigenvalues_bisect(truncated_jacobi(sec, n), 1e-13).eigenvalues;
  auto fn = [&](double x) { return solve_recursion(sec, x, n, InitialKind::Polynomial).value(n).real(); };
  bool zeros_ok = ev.size() == n;
  for (double x : ev) {
    const double h = 1e-8 * std::max(1.0, std::abs(x));
    zeros_ok = zeros_ok && fn(x - h) * fn(x + h) < 0.0;
  }
  bool interlace_ok = true;
  std::vector<double> prev = eigenvalues_bisect(truncated_jacobi(sec, 1), 1e-12).eigenvalues;
  for (std::size_t m = 2; m <= 200; ++m) {
    auto cur = eigenvalues_bisect(truncated_jacobi(sec, m), 1e-12).eigenvalues;
    interlace_ok = interlace_ok && strictly_interlace(prev, cur);
    prev = std::move(cur);
  }
  return {zeros_ok && interlace_ok, std::string("f_12 sign change within 1e-8 of every eigenvalue: ") +
                                        (zeros_ok ? "yes" : "no") + "; strict interlacing n <= 200: " +
                                        (interlace_ok ? "yes" : "no")};
}

Outcome extension_spectra()
{
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> thetas{0.0, 0.5, -0.7};
  const auto r200 = extension_sweep({3, 0}, 200, thetas, 1e-12);
  const auto r400 = extension_sweep({3, 0}, 400, thetas, 1e-12);
  double shift = 0.0;
  std::string per_theta;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double s = central_shift(r200[i], r400[i]);
    shift = std::max(shift, s);
    per_theta += (i ? ", " : "") + fmt(s);
  }
  const double gap = spectrum_diagnostics(r400, std::numeric_limits<double>::infinity(), 5).cross_min_gap;

  const auto c200 = eigenvalues_bisect(truncated_jacobi({2, 0}, 200), 1e-12);
  const auto c400 = eigenvalues_bisect(truncated_jacobi({2, 0}, 400), 1e-12);
  const double contrast = central_shift(c200, c400);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool ok = shift < 1e-6 && gap > 1e-3 && contrast > 1e-3 && secs <= 120.0;
  return {ok, "k=3 n 200->400 shifts [" + per_theta + "] (tol 1e-6); cross-theta gap " + fmt(gap) +
                  " (> 1e-3); k=2 shift " + fmt(contrast) + " (> 1e-3); " + fmt(secs) + " s"};
}

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome residual_contract()
{
  struct Case {
    std::vector<std::string> args;
    int k, kappa;
    cplx nu, lambda;
    double tol;
  };
  const std::vector<Case> cases{
      {{"--k", "1", "--nu", "0.3", "--lambda", "1+i", "--tol", "1e-12"}, 1, 0, 0.3, {1, 1}, 1e-12},
      {{"--k", "2", "--nu", "0.5i", "--lambda", "1+i", "--tol", "1e-10"}, 2, 0, {0, 0.5}, {1, 1}, 1e-10},
      {{"--k", "2", "--kappa", "0", "--nu", "0.5", "--lambda", "0", "--tol", "1e-10"}, 2, 0, 0.5, 0.0, 1e-10},
      {{"--k", "3", "--nu", "0.3", "--lambda", "0", "--tol", "1e-8"}, 3, 0, 0.3, 0.0, 1e-8},
      {{"--k", "3", "--kappa", "2", "--nu", "0.3", "--lambda", "1+i", "--tol", "1e-10"}, 3, 2, 0.3, {1, 1}, 1e-10},
      {{"--k", "4", "--kappa", "1", "--nu", "2-1i", "--lambda", "-0.5+2i", "--tol", "1e-10"}, 4, 1, {2, -1}, {-0.5, 2}, 1e-10},
      {{"--k", "3", "--kappa", "1", "--lambda", "2-i", "--tol", "1e-10"}, 3, 1, 0.0, {2, -1}, 1e-10},
  };
  double worst_ratio = 0.0;
  for (const auto& c : cases) {
    std::vector<std::string> args{"state"};
    args.insert(args.end(), c.args.begin(), c.args.end());
    args.insert(args.end(), {"--format", "json"});
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) return {false, "state command failed: " + err.str()};
    const auto j = nlohmann::json::parse(out.str());
    FockVector v{{c.k, c.kappa}, {}, 0.0};
    for (const auto& row : j["results"]["rows"]) v.coefficients.emplace_back(row[1].get<double>(), row[2].get<double>());
    const double res = residual_check(v, SqueezeParams({c.k, c.kappa}, c.nu, c.lambda));
    worst_ratio = std::max(worst_ratio, res / c.tol);
  }

  const std::vector<std::vector<std::string>> examples{
      {"state", "--k", "2", "--kappa", "0", "--nu", "0.5", "--lambda", "0", "--tol", "1e-10", "--format", "csv"},
      {"classify", "--k", "3", "--M", "10000", "--format", "json"},
      {"spectrum", "--k", "1", "--n", "5", "--tol", "1e-10"},
  };
  const auto dir = std::filesystem::temp_directory_path();
  bool identical = true;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    std::string text[2];
    for (int run = 0; run < 2; ++run) {
      const auto path = dir / ("powsq_acceptance_" + std::to_string(i) + "_" + std::to_string(run));
      auto args = examples[i];
      args.insert(args.end(), {"--out", path.string()});
      std::ostringstream out, err;
      identical = identical && cli::run(args, out, err) == 0;
      text[run] = slurp(path);
      std::filesystem::remove(path);
    }
    identical = identical && !text[0].empty() && text[0] == text[1];
  }
  return {worst_ratio <= 10.0 && identical, "max residual/tol " + fmt(worst_ratio) + " (limit 10); examples byte-identical: " +
                                                (identical ? "yes" : "no")};
}

} // namespace

int main()
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"pollaczek identity", pollaczek_identity},
      {"hermite identity", hermite_identity},
      {"orthonormality", orthonormality},
      {"moment roundtrip", moment_roundtrip},
      {"determinacy classification", determinacy},
      {"deficiency evidence", deficiency},
      {"SR equality", sr_equality},
      {"eigenvalue consistency", eigenvalue_consistency},
      {"extension spectra", extension_spectra},
      {"residual contract", residual_contract},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
