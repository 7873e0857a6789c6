#include "bezred/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bezred::io {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Curve parse_curve(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("curve file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DomainError("curve file: top level must be an object");
  for (const char* field : {"degree", "dimension", "points"}) {
    if (!doc.contains(field)) throw DomainError(std::string("curve file: missing field '") + field + "'");
  }
  if (!doc["degree"].is_number_integer() || doc["degree"].get<long long>() < 0) {
    throw DomainError("curve file: field 'degree' must be a nonnegative integer");
  }
  if (!doc["dimension"].is_number_integer() || doc["dimension"].get<long long>() < 1) {
    throw DomainError("curve file: field 'dimension' must be a positive integer");
  }
  const auto degree = doc["degree"].get<long long>();
  const auto dimension = doc["dimension"].get<long long>();
  const auto& pts = doc["points"];
  if (!pts.is_array()) throw DomainError("curve file: field 'points' must be an array");
  if (static_cast<long long>(pts.size()) != degree + 1) {
    throw DomainError("curve file: field 'points' has " + std::to_string(pts.size()) + " entries, expected degree+1 = " +
                      std::to_string(degree + 1));
  }
  Points points(degree + 1, dimension);
  for (long long i = 0; i <= degree; ++i) {
    const auto& row = pts[i];
    if (!row.is_array() || static_cast<long long>(row.size()) != dimension) {
      throw DomainError("curve file: field 'points[" + std::to_string(i) + "]' must hold dimension = " +
                        std::to_string(dimension) + " numbers");
    }
    for (long long h = 0; h < dimension; ++h) {
      if (!row[h].is_number()) {
        throw DomainError("curve file: field 'points[" + std::to_string(i) + "][" + std::to_string(h) +
                          "]' is not a number");
      }
      points(i, h) = row[h].get<double>();
    }
  }
  return Curve(std::move(points));
}

std::string serialize_curve(const Curve& curve) {
  if (!curve.points().allFinite()) throw DomainError("serialize_curve: control points must be finite");
  std::ostringstream out;
  out << "{\n  \"degree\": " << curve.degree() << ",\n  \"dimension\": " << curve.dimension()
      << ",\n  \"points\": [\n";
  for (int i = 0; i <= curve.degree(); ++i) {
    out << "    [";
    for (int h = 0; h < curve.dimension(); ++h) out << (h ? ", " : "") << format_double(curve.points()(i, h));
    out << (i < curve.degree() ? "],\n" : "]\n");
  }
  out << "  ]\n}\n";
  return out.str();
}

Curve load_curve(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open curve file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading curve file '" + path + "'");
  return parse_curve(buf.str());
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string polyline(const std::vector<std::pair<double, double>>& pts) {
  std::ostringstream out;
  for (size_t i = 0; i < pts.size(); ++i) {
    out << (i ? " " : "") << format_double(pts[i].first) << ',' << format_double(pts[i].second);
  }
  return out.str();
}

std::vector<std::pair<double, double>> sample(const Curve& c, int samples) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < samples; ++i) {
    const double t = samples > 1 ? double(i) / double(samples - 1) : 0.0;
    const Point<double> x = evaluate(c, t);
    pts.emplace_back(x(0), x(1));
  }
  return pts;
}

std::vector<std::pair<double, double>> polygon(const Curve& c) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i <= c.degree(); ++i) pts.emplace_back(c.points()(i, 0), c.points()(i, 1));
  return pts;
}

}  // namespace

void save_curve(const Curve& curve, const std::string& path) { write_file(path, serialize_curve(curve)); }

std::string render_svg(const Curve& source, const Curve& reduced, const SvgOptions& options) {
  if (source.dimension() != 2 || reduced.dimension() != 2) {
    throw UnsupportedPlotError("SVG output needs planar curves (dimension 2)");
  }
  // Both curves lie in the convex hulls of their control polygons.
  double min_x = std::min(source.coordinate(0).minCoeff(), reduced.coordinate(0).minCoeff());
  double max_x = std::max(source.coordinate(0).maxCoeff(), reduced.coordinate(0).maxCoeff());
  double min_y = std::min(source.coordinate(1).minCoeff(), reduced.coordinate(1).minCoeff());
  double max_y = std::max(source.coordinate(1).maxCoeff(), reduced.coordinate(1).maxCoeff());
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-12});
  const double pad = options.margin * extent;
  const double vx = min_x - pad, vy = min_y - pad;
  const double vw = (max_x - min_x) + 2 * pad, vh = (max_y - min_y) + 2 * pad;
  const double radius = 0.006 * extent;
  const double px_w = 800.0;
  const double px_h = std::max(1.0, std::round(px_w * vh / std::max(vw, 1e-300)));

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px_w << "\" height=\"" << px_h << "\" viewBox=\""
      << format_double(vx) << ' ' << format_double(vy) << ' ' << format_double(vw) << ' ' << format_double(vh)
      << "\">\n";
  // Mirror y about the middle of the viewBox so the plot is y-up.
  out << "  <g transform=\"matrix(1 0 0 -1 0 " << format_double(2 * vy + vh) << ")\" fill=\"none\">\n";

  auto control_polygon = [&](const Curve& c, const char* colour, const char* id) {
    out << "    <polyline id=\"" << id << "-polygon\" points=\"" << polyline(polygon(c)) << "\" stroke=\"" << colour
        << "\" stroke-width=\"0.75\" stroke-opacity=\"0.6\" vector-effect=\"non-scaling-stroke\"/>\n";
    for (const auto& [x, y] : polygon(c)) {
      out << "    <circle cx=\"" << format_double(x) << "\" cy=\"" << format_double(y) << "\" r=\""
          << format_double(radius) << "\" stroke=\"" << colour
          << "\" stroke-width=\"0.75\" vector-effect=\"non-scaling-stroke\"/>\n";
    }
  };
  control_polygon(source, "#1f4e9c", "source");
  control_polygon(reduced, "#c0392b", "reduced");
  out << "    <polyline id=\"source-curve\" points=\"" << polyline(sample(source, options.samples))
      << "\" stroke=\"#1f4e9c\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
  out << "    <polyline id=\"reduced-curve\" points=\"" << polyline(sample(reduced, options.samples))
      << "\" stroke=\"#c0392b\" stroke-width=\"2\" stroke-dasharray=\"8 5\" vector-effect=\"non-scaling-stroke\"/>\n";
  out << "  </g>\n</svg>\n";
  return out.str();
}

void emit_svg(const Curve& source, const Curve& reduced, const std::string& path, const SvgOptions& options) {
  write_file(path, render_svg(source, reduced, options));
}

Report make_report(const ReductionProblem& problem, Mode mode, const ReductionResult& result, int grid) {
  Report r;
  r.mode = to_string(mode);
  r.n = problem.n();
  r.m = problem.m();
  r.k = problem.spec.k;
  r.l = problem.spec.l;
  r.p = problem.spec.p_fixed;
  r.q = problem.spec.q_fixed;
  r.alpha = problem.weight.alpha;
  r.beta = problem.weight.beta;
  r.d0 = problem.spec.d0;
  r.d1 = problem.spec.d1;
  r.grid = grid;
  r.e2 = result.e2;
  r.einf = result.einf;
  r.lambdas.assign(result.params.lambdas.data(), result.params.lambdas.data() + result.params.lambdas.size());
  r.mus.assign(result.params.mus.data(), result.params.mus.data() + result.params.mus.size());
  r.diagnostics = result.diagnostics;
  return r;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out + '"';
}

std::string number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

std::string array(const std::vector<double>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + number(values[i]);
  return out + "]";
}

std::string array(const std::vector<std::string>& values) {
  std::string out = "[";
  for (size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + quote(values[i]);
  return out + "]";
}

}  // namespace

std::string to_json(const Report& r) {
  const auto& d = r.diagnostics;
  std::ostringstream out;
  out << "{\"mode\":" << quote(r.mode) << ",\"n\":" << r.n << ",\"m\":" << r.m << ",\"k\":" << r.k
      << ",\"l\":" << r.l << ",\"p\":" << quote(r.p ? "1" : "-") << ",\"q\":" << quote(r.q ? "1" : "-")
      << ",\"alpha\":" << number(r.alpha) << ",\"beta\":" << number(r.beta) << ",\"d0\":" << number(r.d0)
      << ",\"d1\":" << number(r.d1) << ",\"grid\":" << r.grid << ",\"e2\":" << number(r.e2)
      << ",\"einf\":" << number(r.einf) << ",\"params\":{\"lambda\":" << array(r.lambdas)
      << ",\"mu\":" << array(r.mus) << "}"
      << ",\"diagnostics\":{\"route\":" << quote(d.solver.route) << ",\"iterations\":" << d.solver.iterations
      << ",\"starts\":" << d.solver.starts << ",\"converged\":" << (d.solver.converged ? "true" : "false")
      << ",\"residual_norm\":" << number(d.solver.residual_norm)
      << ",\"active_bounds\":" << array(d.solver.active_bounds) << ",\"gram_condition\":" << number(d.gram_condition)
      << ",\"warnings\":" << array(d.warnings) << "}"
      << ",\"timings\":{\"phase_a_ms\":" << number(1e3 * d.phase_a_seconds)
      << ",\"phase_b_ms\":" << number(1e3 * d.phase_b_seconds) << "}}";
  return out.str();
}

}  // namespace bezred::io
