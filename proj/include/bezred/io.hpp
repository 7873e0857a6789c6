#pragma once

// Curve files, SVG plots and JSON reports.
//
// Curve file schema (UTF-8 JSON):
//   {"degree": n, "dimension": d, "points": [[x, y, ...], ...]}
// with n+1 points of d coordinates each. Numbers are written with 17
// significant digits, which round-trips every double exactly.

#include <stdexcept>
#include <string>
#include <vector>

#include "bezred/reduction.hpp"

namespace bezred::io {

/// File could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plot requested for a curve that is not planar.
class UnsupportedPlotError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// "%.17g"
std::string format_double(double value);

/// Throws DomainError naming the offending field on schema violations.
Curve parse_curve(const std::string& text);
std::string serialize_curve(const Curve& curve);

Curve load_curve(const std::string& path);
void save_curve(const Curve& curve, const std::string& path);

struct SvgOptions {
  int samples{500};
  double margin{0.05};
};

/// Source curve solid, reduced curve dashed, both control polygons thin with
/// circle markers. The viewBox is in curve coordinates.
std::string render_svg(const Curve& source, const Curve& reduced, const SvgOptions& options = {});
void emit_svg(const Curve& source, const Curve& reduced, const std::string& path, const SvgOptions& options = {});

struct Report {
  std::string mode;
  int n{0};
  int m{0};
  int k{-1};
  int l{-1};
  bool p{false};
  bool q{false};
  double alpha{0.0};
  double beta{0.0};
  double d0{1e-4};
  double d1{1e-4};
  int grid{kDefaultGrid};
  double e2{0.0};
  double einf{0.0};
  std::vector<double> lambdas;
  std::vector<double> mus;
  Diagnostics diagnostics;
};

Report make_report(const ReductionProblem& problem, Mode mode, const ReductionResult& result, int grid);

/// Single-line JSON object; floats at 17 significant digits.
std::string to_json(const Report& report);

}  // namespace bezred::io
