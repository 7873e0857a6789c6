#include "bezred/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <string>

#include "bezred/io.hpp"
#include "bezred/reduction.hpp"

namespace bezred::cli {

namespace {

// The five "natural" Jacobi weights: (alpha, beta).
const std::map<std::string, std::pair<double, double>>& weight_presets() {
  static const std::map<std::string, std::pair<double, double>> presets{
      {"legendre", {0.0, 0.0}},  {"cheb1", {-0.5, -0.5}},   {"cheb2", {0.5, 0.5}},
      {"mixed-mp", {-0.5, 0.5}}, {"mixed-pm", {0.5, -0.5}},
  };
  return presets;
}

struct WeightArgs {
  double alpha{0.0};
  double beta{0.0};
  std::string preset;

  void attach(CLI::App& cmd) {
    auto* a = cmd.add_option("--alpha", alpha, "weight exponent of (1-t)");
    auto* b = cmd.add_option("--beta", beta, "weight exponent of t");
    std::string names;
    for (const auto& [name, value] : weight_presets()) names += (names.empty() ? "" : ", ") + name;
    cmd.add_option("--weight", preset, "weight preset: " + names)->excludes(a)->excludes(b);
  }

  Weight resolve() const {
    if (!preset.empty()) {
      const auto it = weight_presets().find(preset);
      if (it == weight_presets().end()) throw DomainError("unknown weight preset '" + preset + "'");
      return Weight(it->second.first, it->second.second);
    }
    return Weight(alpha, beta);
  }
};

struct ReduceArgs {
  std::string input;
  std::string output;
  std::string svg;
  std::string mode;
  int degree{0};
  int k{-1};
  int l{-1};
  bool p_fixed{false};
  bool q_fixed{false};
  double d0{1e-4};
  double d1{1e-4};
  int grid{kDefaultGrid};
  int max_degree{kDefaultMaxDegree};
  WeightArgs weight;
};

struct VerifyArgs {
  std::string input;
  std::string against;
  int grid{kDefaultGrid};
  WeightArgs weight;
};

int run_reduce(const ReduceArgs& args, std::ostream& out) {
  const Mode mode = parse_mode(args.mode);
  ReductionProblem problem;
  problem.weight = args.weight.resolve();
  problem.source = io::load_curve(args.input);
  problem.target_degree = args.degree;
  problem.spec.k = args.k;
  problem.spec.l = args.l;
  // The hybrid mode pins lambda_1 / mu_1 wherever the order is at least two.
  problem.spec.p_fixed = args.p_fixed || (mode == Mode::cg && args.k >= 2);
  problem.spec.q_fixed = args.q_fixed || (mode == Mode::cg && args.l >= 2);
  problem.spec.d0 = args.d0;
  problem.spec.d1 = args.d1;
  if (args.grid < 1) throw DomainError("--grid must be at least 1");
  if (!args.svg.empty() && problem.source.dimension() != 2) {
    throw io::UnsupportedPlotError("--svg needs a planar curve, got dimension " +
                                   std::to_string(problem.source.dimension()));
  }

  ReductionOptions options;
  options.grid = args.grid;
  options.max_degree = args.max_degree;
  const ReductionResult result = reduce(problem, mode, options);

  if (!args.output.empty()) io::save_curve(result.reduced, args.output);
  if (!args.svg.empty()) io::emit_svg(problem.source, result.reduced, args.svg);
  out << io::to_json(io::make_report(problem, mode, result, args.grid)) << '\n';
  return kSuccess;
}

int run_verify(const VerifyArgs& args, std::ostream& out) {
  const Weight w = args.weight.resolve();
  const Curve a = io::load_curve(args.input);
  const Curve b = io::load_curve(args.against);
  if (args.grid < 1) throw DomainError("--grid must be at least 1");
  const double e = squared_error(a, b, w);
  out << "{\"squared_error\":" << io::format_double(e) << ",\"e2\":" << io::format_double(std::sqrt(e))
      << ",\"einf\":" << io::format_double(max_error(a, b, args.grid)) << ",\"alpha\":" << io::format_double(w.alpha)
      << ",\"beta\":" << io::format_double(w.beta) << ",\"grid\":" << args.grid << "}\n";
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained multi-degree reduction of Bezier curves", "bezred"};
  app.require_subcommand(1);

  ReduceArgs ra;
  auto* reduce_cmd = app.add_subcommand("reduce", "reduce a curve to a lower degree under endpoint constraints");
  reduce_cmd->add_option("--input", ra.input, "source curve file (JSON)")->required();
  reduce_cmd->add_option("--degree", ra.degree, "target degree m")->required();
  reduce_cmd->add_option("--mode", ra.mode, "c (C^{k,l}), cg (C^{p,q}/G^{k,l}) or g (G^{k,l})")->required();
  reduce_cmd->add_option("-k", ra.k, "continuity order at t=0 (-1..3)");
  reduce_cmd->add_option("-l", ra.l, "continuity order at t=1 (-1..3)");
  reduce_cmd->add_flag("--p-fixed", ra.p_fixed, "pin lambda_1 = 1 (implied in cg mode when k >= 2)");
  reduce_cmd->add_flag("--q-fixed", ra.q_fixed, "pin mu_1 = 1 (implied in cg mode when l >= 2)");
  ra.weight.attach(*reduce_cmd);
  reduce_cmd->add_option("--d0", ra.d0, "lower bound for lambda_1");
  reduce_cmd->add_option("--d1", ra.d1, "lower bound for mu_1");
  reduce_cmd->add_option("--grid", ra.grid, "sampling grid size N for the maximum error");
  reduce_cmd->add_option("--output", ra.output, "write the reduced curve to this file");
  reduce_cmd->add_option("--svg", ra.svg, "write an SVG plot (planar curves only)");
  reduce_cmd->add_option("--max-degree", ra.max_degree, "largest accepted source degree");

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "recompute e2 and einf between two curve files");
  verify_cmd->add_option("--input", va.input, "first curve file")->required();
  verify_cmd->add_option("--against", va.against, "second curve file")->required();
  va.weight.attach(*verify_cmd);
  verify_cmd->add_option("--grid", va.grid, "sampling grid size N for the maximum error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "bezred: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    if (reduce_cmd->parsed()) return run_reduce(ra, out);
    return run_verify(va, out);
  } catch (const io::IoError& e) {
    err << "bezred: I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const DomainError& e) {
    err << "bezred: invalid input: " << e.what() << '\n';
    return kValidationError;
  } catch (const NumericalError& e) {
    err << "bezred: numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace bezred::cli
