#pragma once

// Batch front end: every subcommand is a pure function of its flags.

#include <complex>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace powsq::cli {

enum class OutputFormat { Csv, Json };

struct RunConfig {
  std::string command;
  std::optional<int> k;
  int kappa = 0;
  std::optional<std::complex<double>> nu;
  std::optional<std::complex<double>> lambda;
  double tol = 1e-10;
  std::optional<std::size_t> M;
  std::optional<std::size_t> n;
  std::vector<double> theta;
  std::optional<double> b;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> out;
  std::optional<std::string> input; ///< verify-sr: state JSON produced by `state --format json`
};

/// Parses "a", "bi", "a+bi", "a-bi", "i", "-i" (no spaces needed; spaces ignored).
std::complex<double> parse_complex(const std::string& text);

/// Runs one command line (args excludes the program name). Returns the exit
/// status: 0 success, 1 numerical failure, 2 invalid flags. Output goes to
/// `out` unless --out is given; the one-line error reason goes to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace powsq::cli
