#pragma once

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "efdiv/bayes.hpp"
#include "efdiv/chernoff.hpp"
#include "efdiv/divergences.hpp"
#include "efdiv/oracle.hpp"
#include "efdiv/problem_io.hpp"

namespace efdiv::cli {

// Exit codes: 0 success, 1 failed verification, 2 invalid input,
// 3 numerical non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNoConvergence = 3;

namespace detail_cli {

struct Options {
  std::string problem_file;
  std::string output;  // empty = stdout
  std::string format = "json";
  std::optional<double> alpha;
  int grid_points = 99;
  std::uint64_t seed = 0;
  long samples = 1'000'000;
  BisectionConfig bisection;
};

inline int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline io::json load_problem_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::input_error(path + ": cannot open problem file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return io::json::parse(text);
  } catch (const io::json::parse_error& e) {
    throw io::input_error(path + ":" +
                          std::to_string(line_of_byte(text, e.byte)) + ": " +
                          e.what());
  }
}

inline std::string fmt17(double v) { return detail_chernoff::fmt17(v); }

inline void flatten_csv(const io::json& j, const std::string& prefix,
                        std::ostream& os) {
  for (const auto& [key, value] : j.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_csv(value, name, os);
    } else if (value.is_number_float()) {
      os << name << ',' << fmt17(value.get<double>()) << '\n';
    } else {
      os << name << ',' << value.dump() << '\n';
    }
  }
}

inline void emit(const io::json& report, const Options& opt, std::ostream& out) {
  std::ostringstream body;
  if (opt.format == "csv") {
    flatten_csv(report, "", body);
  } else {
    body << report.dump(2) << '\n';
  }
  if (opt.output.empty()) {
    out << body.str();
    return;
  }
  std::ofstream file(opt.output);
  if (!file) throw io::input_error(opt.output + ": cannot open output file");
  file << body.str();
}

inline void emit_text(const std::string& body, const Options& opt,
                      std::ostream& out) {
  if (opt.output.empty()) {
    out << body;
    return;
  }
  std::ofstream file(opt.output);
  if (!file) throw io::input_error(opt.output + ": cannot open output file");
  file << body;
}

inline io::json theta_json(const ParamPoint& pt) {
  io::json out = io::json::array();
  for (Eigen::Index i = 0; i < pt.data.vec.size(); ++i)
    out.push_back(pt.data.vec[i]);
  return out;
}

inline const char* method_name(ChernoffMethod m) {
  return m == ChernoffMethod::closed_form ? "closed_form" : "bisection";
}

inline int run_divergence(const io::ProblemSpec& prob, const Options& opt,
                          std::ostream& out) {
  io::json report;
  report["family"] = prob.family_name;
  report["kl_pq"] = kl(prob.p, prob.q).value;
  report["kl_qp"] = kl(prob.q, prob.p).value;
  report["jeffreys"] = jeffreys(prob.p, prob.q).value;
  report["resistor_average"] = resistor_average(prob.p, prob.q).value;
  report["bhattacharyya"] = bhattacharyya(prob.p, prob.q).value;
  if (opt.alpha) {
    const double a = *opt.alpha;
    io::json at;
    at["alpha"] = a;
    at["chernoff_alpha"] = chernoff_alpha_divergence(prob.p, prob.q, a).value;
    at["chernoff_alpha_second_type"] =
        chernoff_alpha_divergence_second_type(prob.p, prob.q, a).value;
    at["renyi"] = renyi(prob.p, prob.q, a).value;
    at["tsallis"] = tsallis(prob.p, prob.q, a).value;
    at["coefficient"] = chernoff_alpha_coefficient(prob.p, prob.q, a);
    report["alpha_divergences"] = at;
  }
  emit(report, opt, out);
  return kExitOk;
}

inline int run_chernoff(const io::ProblemSpec& prob, const Options& opt,
                        std::ostream& out) {
  const ChernoffResult res =
      chernoff_information(prob.p, prob.q, opt.bisection);
  io::json report;
  report["family"] = prob.family_name;
  report["alpha_star"] = res.alpha_star;
  report["info"] = res.info;
  report["theta_star"] = theta_json(res.theta_star);
  report["bregman_gap"] = res.bregman_gap;
  report["iterations"] = res.iterations;
  report["method"] = method_name(res.method);
  emit(report, opt, out);
  return kExitOk;
}

inline int run_sweep(const io::ProblemSpec& prob, const Options& opt,
                     std::ostream& out) {
  if (opt.grid_points < 2)
    throw io::input_error("--grid-points must be >= 2");
  const SweepTable table =
      alpha_sweep(prob.p, prob.q, uniform_alpha_grid(opt.grid_points));
  if (opt.format == "csv") {
    std::ostringstream body;
    table.to_csv(body);
    emit_text(body.str(), opt, out);
    return kExitOk;
  }
  io::json rows = io::json::array();
  for (const SweepRow& r : table.rows)
    rows.push_back({{"alpha", r.alpha}, {"chernoff_alpha_divergence", r.value}});
  io::json report;
  report["family"] = prob.family_name;
  report["rows"] = rows;
  emit(report, opt, out);
  return kExitOk;
}

inline int run_verify(const io::ProblemSpec& prob, const Options& opt,
                      std::ostream& out) {
  const double a = opt.alpha.value_or(0.5);
  const oracle::IntegrationSpec spec = oracle::default_spec(*prob.family);
  const double jensen = chernoff_alpha_divergence(prob.p, prob.q, a).value;
  io::json report;
  report["family"] = prob.family_name;
  report["alpha"] = a;
  report["closed_form"] = jensen;
  bool pass = false;
  if (spec.scheme == oracle::Scheme::monte_carlo) {
    // Statistical comparison in coefficient space: 5 standard errors.
    const oracle::McEstimate mc =
        oracle::mc_chernoff_coefficient(prob.p, prob.q, a, spec, opt.seed);
    const double abs_error = std::abs(std::exp(-jensen) - mc.value);
    pass = abs_error <= 5.0 * mc.std_error;
    report["oracle"] = -std::log(mc.value);
    report["abs_error"] = abs_error;
    report["tolerance"] = 5.0 * mc.std_error;
    report["std_error"] = mc.std_error;
  } else {
    const double coeff =
        oracle::chernoff_coefficient_numeric(prob.p, prob.q, a, spec, opt.seed);
    const double reference = -std::log(coeff);
    const double abs_error = std::abs(jensen - reference);
    constexpr double kTolerance = 1e-6;
    pass = abs_error <= kTolerance;
    report["oracle"] = reference;
    report["abs_error"] = abs_error;
    report["tolerance"] = kTolerance;
  }
  report["pass"] = pass;
  emit(report, opt, out);
  return pass ? kExitOk : kExitVerifyFailed;
}

inline int run_bound(const io::ProblemSpec& prob, const Options& opt,
                     std::ostream& out) {
  const bayes::BinaryProblem problem(prob.p, prob.q, prob.w1);
  const bayes::BoundOrderingReport ord = bayes::bound_ordering_report(problem);
  io::json report;
  report["family"] = prob.family_name;
  report["w1"] = prob.w1;
  report["chernoff_info"] = ord.chernoff_info;
  report["resistor"] = ord.resistor;
  report["jeffreys"] = ord.jeffreys;
  report["bhattacharyya_info"] = ord.bhattacharyya_info;
  report["alpha_star"] = ord.alpha_star;
  report["ordering_ok"] = ord.ordering_ok();
  report["best_bound"] = bayes::best_chernoff_bound(problem);
  if (opt.alpha)
    report["bound_at_alpha"] = bayes::chernoff_bound(problem, *opt.alpha);
  emit(report, opt, out);
  return kExitOk;
}

inline int run_simulate(const io::ProblemSpec& prob, const Options& opt,
                        std::ostream& out) {
  const bayes::BinaryProblem problem(prob.p, prob.q, prob.w1);
  const bayes::ErrorEstimate est =
      bayes::empirical_bayes_error(problem, opt.samples, opt.seed);
  io::json report;
  report["family"] = prob.family_name;
  report["w1"] = prob.w1;
  report["samples"] = est.samples;
  report["seed"] = opt.seed;
  report["point_estimate"] = est.point_estimate;
  report["std_error"] = est.std_error;
  report["best_bound"] = bayes::best_chernoff_bound(problem);
  const SupportKind kind = prob.family->support.kind;
  if (kind == SupportKind::binary || kind == SupportKind::nonnegative_integers)
    report["exact_error"] = oracle::bayes_error_exact(
        prob.p, prob.q, prob.w1, oracle::default_spec(*prob.family));
  emit(report, opt, out);
  return kExitOk;
}

}  // namespace detail_cli

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  using namespace detail_cli;
  CLI::App app{"Divergences, Chernoff information and Bayes-error bounds "
               "for exponential families"};
  app.require_subcommand(1);

  Options opt;
  std::string subcommand;
  auto add_common = [&](CLI::App* sub, bool needs_alpha_flag = true) {
    sub->add_option("--problem", opt.problem_file, "problem JSON file")
        ->required();
    sub->add_option("--output", opt.output, "output path (default stdout)");
    sub->add_option("--format", opt.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    if (needs_alpha_flag)
      sub->add_option("--alpha", [&](const std::vector<std::string>& v) {
        opt.alpha = std::stod(v.front());
        return true;
      }, "exponent in (0,1)");
    sub->add_option("--alpha-tolerance", opt.bisection.alpha_tolerance,
                    "bisection interval tolerance");
    sub->add_option("--gap-tolerance", opt.bisection.gap_tolerance,
                    "bisection Bregman-gap tolerance");
    sub->add_option("--max-iterations", opt.bisection.max_iterations,
                    "bisection iteration cap");
    sub->callback([&, sub]() { subcommand = sub->get_name(); });
  };

  add_common(app.add_subcommand("divergence",
                                "divergence panel between p and q"));
  add_common(app.add_subcommand("chernoff", "Chernoff information"),
             /*needs_alpha_flag=*/false);
  CLI::App* sweep = app.add_subcommand("sweep", "alpha sweep table");
  add_common(sweep, /*needs_alpha_flag=*/false);
  sweep->add_option("--grid-points", opt.grid_points, "grid size (default 99)");
  CLI::App* verify =
      app.add_subcommand("verify", "closed form vs numeric oracle");
  add_common(verify);
  verify->add_option("--seed", opt.seed, "oracle seed");
  CLI::App* bound = app.add_subcommand("bound", "Bayes-error bounds");
  add_common(bound);
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte-Carlo Bayes error");
  add_common(simulate, /*needs_alpha_flag=*/false);
  simulate->add_option("--seed", opt.seed, "sampler seed");
  simulate->add_option("--samples", opt.samples, "number of draws");

  std::vector<const char*> argv;
  argv.push_back("efdiv");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (opt.alpha && !(*opt.alpha > 0.0 && *opt.alpha < 1.0))
      throw io::input_error("--alpha must lie in (0,1)");
    const io::json j = load_problem_json(opt.problem_file);
    const io::ProblemSpec prob = io::problem_from_json(j);
    if (subcommand == "divergence") return run_divergence(prob, opt, out);
    if (subcommand == "chernoff") return run_chernoff(prob, opt, out);
    if (subcommand == "sweep") return run_sweep(prob, opt, out);
    if (subcommand == "verify") return run_verify(prob, opt, out);
    if (subcommand == "bound") return run_bound(prob, opt, out);
    if (subcommand == "simulate") return run_simulate(prob, opt, out);
    err << "efdiv: unknown subcommand\n";
    return kExitBadInput;
  } catch (const convergence_error& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const io::input_error& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const io::json::exception& e) {
    err << "efdiv: " << opt.problem_file << ": " << e.what() << '\n';
    return kExitBadInput;
  } catch (const internal_error& e) {
    err << "efdiv: internal error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::invalid_argument& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::domain_error& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const unsupported_error& e) {
    err << "efdiv: " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace efdiv::cli
