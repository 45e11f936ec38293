#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "powsq/powsq.hpp"

namespace powsq::cli {

namespace {

using json = nlohmann::json;

/// Flag validation failure (exit status 2).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Document {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json results = json::object();
  json diagnostics = json::object();
};

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Cell& c)
{
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else return v;
      },
      c);
}

json to_json(const Cell& c)
{
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else return v;
      },
      c);
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json config_json(const RunConfig& cfg)
{
  json j = json::object();
  j["command"] = cfg.command;
  if (cfg.k) j["k"] = *cfg.k;
  j["kappa"] = cfg.kappa;
  if (cfg.nu) j["nu"] = complex_json(*cfg.nu);
  if (cfg.lambda) j["lambda"] = complex_json(*cfg.lambda);
  j["tol"] = cfg.tol;
  if (cfg.M) j["M"] = *cfg.M;
  if (cfg.n) j["n"] = *cfg.n;
  if (!cfg.theta.empty()) j["theta"] = cfg.theta;
  if (cfg.b) j["b"] = *cfg.b;
  j["format"] = cfg.format == OutputFormat::Csv ? "csv" : "json";
  return j;
}

std::string render(const RunConfig& cfg, const Document& doc)
{
  std::ostringstream os;
  if (cfg.format == OutputFormat::Csv) {
    os << "#schema=" << doc.schema << '\n';
    for (std::size_t i = 0; i < doc.columns.size(); ++i) os << (i ? "," : "") << doc.columns[i];
    os << '\n';
    for (const auto& row : doc.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << to_csv(row[i]);
      os << '\n';
    }
    return os.str();
  }
  json results = doc.results;
  results["schema"] = doc.schema;
  results["columns"] = doc.columns;
  json rows = json::array();
  for (const auto& row : doc.rows) {
    json r = json::array();
    for (const auto& c : row) r.push_back(to_json(c));
    rows.push_back(std::move(r));
  }
  results["rows"] = std::move(rows);
  json top = json::object();
  top["config"] = config_json(cfg);
  top["results"] = std::move(results);
  top["diagnostics"] = doc.diagnostics;
  os << top.dump() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// validation helpers

int require_k(const RunConfig& cfg)
{
  if (!cfg.k) throw UsageError("--k is required for " + cfg.command);
  if (*cfg.k < 1) throw UsageError("--k must be >= 1");
  if (cfg.kappa < 0 || cfg.kappa >= *cfg.k) throw UsageError("--kappa must lie in [0, k-1]");
  return *cfg.k;
}

void require_tol(const RunConfig& cfg)
{
  if (!(cfg.tol > 0.0 && cfg.tol <= 1e-4)) throw UsageError("--tol must lie in (0, 1e-4]");
}

std::size_t require_n(const RunConfig& cfg, std::size_t min_value)
{
  if (!cfg.n) throw UsageError("--n is required for " + cfg.command);
  if (*cfg.n < min_value) throw UsageError("--n must be >= " + std::to_string(min_value));
  return *cfg.n;
}

double require_b(const RunConfig& cfg)
{
  if (!cfg.b) throw UsageError("--b is required for " + cfg.command);
  if (!(*cfg.b > 0.0)) throw UsageError("--b must be positive");
  return *cfg.b;
}

// ---------------------------------------------------------------------------
// commands

Document state_document(const FockVector& v, const SqueezeParams& params, double tol)
{
  const double residual = residual_check(v, params);
  if (!(residual <= 10.0 * tol))
    throw NumericalError("states", "residual_check",
                         "residual " + format_double(residual) + " exceeds 10*tol = " + format_double(10.0 * tol));
  Document doc;
  doc.schema = "state/1";
  doc.columns = {"m", "re_c", "im_c"};
  for (std::size_t m = 0; m < v.coefficients.size(); ++m)
    doc.rows.push_back({static_cast<long long>(m), v.coefficients[m].real(), v.coefficients[m].imag()});
  doc.diagnostics["cutoff"] = v.cutoff();
  doc.diagnostics["tail_estimate"] = v.tail_estimate;
  doc.diagnostics["residual"] = residual;
  doc.diagnostics["mu"] = params.mu();
  if (params.nu() != std::complex<double>{}) doc.diagnostics["lambda_prime"] = complex_json(params.lambda_prime());
  return doc;
}

Document cmd_state(const RunConfig& cfg)
{
  const int k = require_k(cfg);
  require_tol(cfg);
  if (!cfg.lambda) throw UsageError("--lambda is required for state");
  const SectorParams sector{k, cfg.kappa};
  const SqueezeParams params{sector, cfg.nu.value_or(0.0), *cfg.lambda};
  const FockVector v = params.nu() == std::complex<double>{} ? build_power_coherent(sector, params.lambda())
                                                              : build_state(params, cfg.tol);
  return state_document(v, params, cfg.tol);
}

Document cmd_spectrum(const RunConfig& cfg)
{
  const int k = require_k(cfg);
  const std::size_t n = require_n(cfg, 1);
  if (cfg.theta.size() > 1) throw UsageError("spectrum takes at most one --theta; use extensions");
  const SectorParams sector{k, cfg.kappa};
  const auto T = cfg.theta.empty() ? truncated_jacobi(sector, n) : boundary_modified_jacobi(sector, n, cfg.theta[0]);
  const auto report = eigenvalues_bisect(T, cfg.tol);

  Document doc;
  doc.schema = "spectrum/1";
  doc.columns = {"rank", "eigenvalue"};
  if (k == 2) doc.columns.push_back("ell");
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    std::vector<Cell> row{static_cast<long long>(i), report.eigenvalues[i]};
    if (k == 2) row.push_back(report.eigenvalues[i] / 4.0);
    doc.rows.push_back(std::move(row));
  }
  doc.diagnostics["n"] = report.n;
  doc.diagnostics["bisect_tol"] = report.bisect_tol;
  if (!cfg.theta.empty()) doc.diagnostics["boundary_theta"] = cfg.theta[0];
  return doc;
}

Document cmd_extensions(const RunConfig& cfg)
{
  const int k = require_k(cfg);
  const std::size_t n = require_n(cfg, 50);
  if (cfg.theta.empty()) throw UsageError("extensions needs at least one --theta");
  std::vector<double> thetas = cfg.theta;
  std::sort(thetas.begin(), thetas.end());
  const auto reports = extension_sweep(SectorParams{k, cfg.kappa}, n, thetas, cfg.tol);

  Document doc;
  doc.schema = "extensions/1";
  doc.columns = {"theta", "rank", "eigenvalue"};
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
      doc.rows.push_back({*r.boundary_theta, static_cast<long long>(i), r.eigenvalues[i]});
  if (reports.size() >= 2) {
    const auto d = spectrum_diagnostics(reports, std::numeric_limits<double>::infinity(), 5);
    doc.diagnostics["central_count"] = 5;
    doc.diagnostics["min_spacing_near_zero"] = d.min_spacing_near_zero;
    doc.diagnostics["cross_min_gap"] = d.cross_min_gap;
  }
  json central = json::array();
  for (const auto& r : reports) central.push_back(central_eigenvalues(r, 5));
  doc.diagnostics["central_eigenvalues"] = std::move(central);
  return doc;
}

Document cmd_classify(const RunConfig& cfg)
{
  const int k = require_k(cfg);
  const std::size_t M = cfg.M.value_or(10000);
  if (M < 1000) throw UsageError("--M must be >= 1000 for classify");
  const auto v = classify_determinacy(k, cfg.kappa, M);

  Document doc;
  doc.schema = "classify/1";
  doc.columns = {"k", "kappa", "M", "verdict", "partial_sum", "lower_bound", "tail_bound", "log_concave_from"};
  const Cell m0 = v.log_concave_from ? Cell{static_cast<long long>(*v.log_concave_from)} : Cell{};
  doc.rows.push_back({static_cast<long long>(v.k), static_cast<long long>(v.kappa), static_cast<long long>(v.M),
                      std::string(to_string(v.verdict)), v.partial_sum, v.lower_bound, v.tail_bound, m0});
  doc.results["verdict"] = to_string(v.verdict);
  doc.results["partial_sum"] = v.partial_sum;
  doc.results["lower_bound"] = v.lower_bound;
  doc.results["tail_bound"] = std::isfinite(v.tail_bound) ? json(v.tail_bound) : json(nullptr);
  doc.results["divergence_certified"] = v.divergence_certified;
  doc.results["convergence_certified"] = v.convergence_certified;
  doc.results["log_concave_from"] = v.log_concave_from ? json(*v.log_concave_from) : json(nullptr);
  return doc;
}

Document cmd_moments(const RunConfig& cfg)
{
  const double b = require_b(cfg);
  require_tol(cfg);
  const std::size_t up_to = cfg.M.value_or(18);
  if (up_to > kMaxMomentOrder) throw UsageError("--M (moment order) must be <= 24");
  const auto s = moments(b, up_to, cfg.tol);

  Document doc;
  doc.schema = "moments/1";
  doc.columns = {"m", "s_m", "quad_error"};
  for (std::size_t m = 0; m < s.size(); ++m)
    doc.rows.push_back({static_cast<long long>(m), s.values[m], s.quad_error[m]});

  const auto h = hankel_positive(s);
  doc.diagnostics["hankel_positive"] = h.positive;
  doc.diagnostics["hankel_checked_order"] = h.checked_order;
  doc.diagnostics["hankel_failing_order"] = h.failing_order ? json(*h.failing_order) : json(nullptr);
  const std::size_t n = std::min<std::size_t>(cfg.n.value_or(8), kMaxHankelJacobiOrder);
  if (h.positive && s.size() >= 2 * n + 3) {
    const auto J = moments_to_jacobi(s, n);
    doc.diagnostics["jacobi_diag"] = J.diag;
    doc.diagnostics["jacobi_offdiag"] = J.offdiag;
  }
  return doc;
}

Document cmd_pollaczek(const RunConfig& cfg)
{
  const double b = require_b(cfg);
  const std::size_t n = require_n(cfg, 0);
  if (!cfg.lambda) throw UsageError("--lambda (the real argument x) is required for pollaczek");
  if (cfg.lambda->imag() != 0.0) throw UsageError("pollaczek needs a real --lambda");
  const double x = cfg.lambda->real();

  Document doc;
  doc.schema = "pollaczek/1";
  doc.columns = {"m", "p_recursion", "p_series", "imag_residue"};
  const auto seq = pollaczek_sequence(static_cast<unsigned>(n), x, b);
  for (std::size_t m = 0; m <= n; ++m) {
    std::vector<Cell> row{static_cast<long long>(m), seq[m]};
    if (m <= kPollaczekSeriesMaxDegree) {
      pollaczek(static_cast<unsigned>(m), x, b); // cross-check; throws on disagreement
      const auto s = pollaczek_series(static_cast<unsigned>(m), x, b);
      row.push_back(s.value);
      row.push_back(s.imag_residue);
    } else {
      row.push_back(Cell{});
      row.push_back(Cell{});
    }
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

FockVector read_state_json(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  try {
    if (j.at("results").at("schema") != "state/1") throw UsageError(path + ": not a state/1 document");
    const SectorParams sector{j.at("config").at("k").get<int>(), j.at("config").at("kappa").get<int>()};
    FockVector v{sector, {}, 0.0};
    for (const auto& row : j.at("results").at("rows"))
      v.coefficients.emplace_back(row.at(1).get<double>(), row.at(2).get<double>());
    return v;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

Document cmd_verify_sr(const RunConfig& cfg)
{
  FockVector v{SectorParams{1, 0}, {}, 0.0};
  if (cfg.input) {
    v = read_state_json(*cfg.input);
  } else {
    const int k = require_k(cfg);
    require_tol(cfg);
    if (!cfg.lambda) throw UsageError("--lambda is required for verify-sr without an input file");
    const SectorParams sector{k, cfg.kappa};
    const SqueezeParams params{sector, cfg.nu.value_or(0.0), *cfg.lambda};
    v = params.nu() == std::complex<double>{} ? build_power_coherent(sector, params.lambda())
                                               : build_state(params, cfg.tol);
  }
  const auto r = sr_report(v);
  Document doc;
  doc.schema = "sr/1";
  doc.columns = {"var_a", "var_b", "cov_ab", "commutator_im", "lhs", "rhs", "gap"};
  doc.rows.push_back({r.var_a, r.var_b, r.cov_ab, r.commutator_expectation.imag(), r.lhs, r.rhs, r.gap});
  doc.results["gap"] = r.gap;
  doc.results["gap_over_rhs"] = r.gap / r.rhs;
  doc.diagnostics["commutator_direct"] = r.commutator_direct;
  doc.diagnostics["cutoff"] = v.cutoff();
  return doc;
}

Document cmd_deficiency(const RunConfig& cfg)
{
  const int k = require_k(cfg);
  const std::size_t M = cfg.M.value_or(5000);
  if (M < 5000) throw UsageError("--M must be >= 5000 for deficiency");
  const auto ev = deficiency_evidence(SectorParams{k, cfg.kappa}, M);

  Document doc;
  doc.schema = "deficiency/1";
  doc.columns = {"solution", "exponent", "envelope_points", "cauchy_ratio", "verdict"};
  auto add = [&](const SolutionEvidence& s) {
    doc.rows.push_back({std::string(to_string(s.kind)), s.profile.exponent,
                        static_cast<long long>(s.profile.envelope_points), s.cauchy_ratio,
                        std::string(to_string(s.verdict))});
  };
  add(ev.polynomial);
  add(ev.second);
  if (ev.minimal) add(*ev.minimal);
  doc.results["count"] = ev.count ? json(*ev.count) : json("inconclusive");
  return doc;
}

Document dispatch(const RunConfig& cfg)
{
  if (cfg.command == "state") return cmd_state(cfg);
  if (cfg.command == "spectrum") return cmd_spectrum(cfg);
  if (cfg.command == "extensions") return cmd_extensions(cfg);
  if (cfg.command == "classify") return cmd_classify(cfg);
  if (cfg.command == "moments") return cmd_moments(cfg);
  if (cfg.command == "pollaczek") return cmd_pollaczek(cfg);
  if (cfg.command == "verify-sr") return cmd_verify_sr(cfg);
  if (cfg.command == "deficiency") return cmd_deficiency(cfg);
  throw UsageError("unknown command " + cfg.command);
}

} // namespace

std::complex<double> parse_complex(const std::string& text)
{
  std::string s;
  for (char c : text)
    if (c != ' ') s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty complex number");

  auto parse_real = [&](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    const double v = std::stod(part, &used);
    if (used != part.size()) throw std::invalid_argument("bad number '" + part + "' in '" + text + "'");
    return v;
  };

  try {
    if (s.back() != 'i' && s.back() != 'j') return {parse_real(s), 0.0};
    const std::string body = s.substr(0, s.size() - 1);
    // split at the last sign that is not leading and not an exponent sign
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
      if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
        split = i;
        break;
      }
    }
    if (split == std::string::npos) return {0.0, parse_real(body)};
    return {parse_real(body.substr(0, split)), parse_real(body.substr(split))};
  } catch (const std::logic_error&) {
    throw std::invalid_argument("cannot parse complex number '" + text + "'");
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  RunConfig cfg;
  CLI::App app{"k-th power squeezed states, sector Jacobi matrices and moment problems", "powsq"};
  app.require_subcommand(1);

  std::optional<std::string> nu_text, lambda_text;
  std::string format_text = "csv";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format_text, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", cfg.out, "output file (default stdout)");
  };
  auto add_sector = [&](CLI::App* sub) {
    sub->add_option("--k", cfg.k, "power k >= 1");
    sub->add_option("--kappa", cfg.kappa, "sector index in [0, k-1]");
  };

  auto* state = app.add_subcommand("state", "build a normalized k-th power squeezed state");
  add_sector(state);
  state->add_option("--nu", nu_text, "squeeze parameter, complex a+bi");
  state->add_option("--lambda", lambda_text, "eigenvalue, complex a+bi");
  state->add_option("--tol", cfg.tol, "tail tolerance in (0, 1e-4]");
  add_common(state);

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the n x n sector truncation");
  add_sector(spectrum);
  spectrum->add_option("--n", cfg.n, "truncation size");
  spectrum->add_option("--tol", cfg.tol, "bisection tolerance");
  spectrum->add_option("--theta", cfg.theta, "boundary parameter (last diagonal = theta * b_{n-1})");
  add_common(spectrum);

  auto* extensions = app.add_subcommand("extensions", "spectra of boundary-modified truncations");
  add_sector(extensions);
  extensions->add_option("--n", cfg.n, "truncation size (>= 50)");
  extensions->add_option("--theta", cfg.theta, "boundary parameter, repeatable");
  extensions->add_option("--tol", cfg.tol, "bisection tolerance");
  add_common(extensions);

  auto* classify = app.add_subcommand("classify", "determined / limit-circle verdict with certificates");
  add_sector(classify);
  classify->add_option("--M", cfg.M, "partial-sum length (>= 1000)");
  add_common(classify);

  auto* moments_cmd = app.add_subcommand("moments", "moments of rho_b, Hankel positivity, Jacobi coefficients");
  moments_cmd->add_option("--b", cfg.b, "weight parameter b > 0");
  moments_cmd->add_option("--M", cfg.M, "highest moment order (<= 24)");
  moments_cmd->add_option("--n", cfg.n, "Jacobi reconstruction size (<= 8)");
  moments_cmd->add_option("--tol", cfg.tol, "quadrature tolerance");
  add_common(moments_cmd);

  auto* pollaczek_cmd = app.add_subcommand("pollaczek", "P_0..P_n at x by recursion and by series");
  pollaczek_cmd->add_option("--b", cfg.b, "parameter b > 0");
  pollaczek_cmd->add_option("--n", cfg.n, "maximum degree");
  pollaczek_cmd->add_option("--lambda", lambda_text, "real argument x");
  add_common(pollaczek_cmd);

  auto* verify = app.add_subcommand("verify-sr", "Schroedinger-Robertson report for a state");
  verify->add_option("input", cfg.input, "state JSON from `state --format json`");
  add_sector(verify);
  verify->add_option("--nu", nu_text, "squeeze parameter, complex a+bi");
  verify->add_option("--lambda", lambda_text, "eigenvalue, complex a+bi");
  verify->add_option("--tol", cfg.tol, "tail tolerance in (0, 1e-4]");
  add_common(verify);

  auto* deficiency = app.add_subcommand("deficiency", "square-summable solutions at lambda' = i");
  add_sector(deficiency);
  deficiency->add_option("--M", cfg.M, "recursion length (>= 5000)");
  add_common(deficiency);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.format = format_text == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (nu_text) cfg.nu = parse_complex(*nu_text);
    if (lambda_text) cfg.lambda = parse_complex(*lambda_text);

    const std::string text = render(cfg, dispatch(cfg));
    if (cfg.out) {
      std::ofstream file(*cfg.out, std::ios::binary);
      if (!file) throw UsageError("cannot write " + *cfg.out);
      file << text;
    } else {
      out << text;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

} // namespace powsq::cli
