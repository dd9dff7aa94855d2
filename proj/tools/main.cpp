#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "app.hpp"
#include "choquard/errors.hpp"

using namespace choquard;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    const auto item = text.substr(start, end - start);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw InvalidInput("not a number: '" + item + "'");
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Ground states, sharp constants and threshold checks for radial Choquard equations"};
  cli.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("-o,--output", output, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "seed (overrides the config)");
  };
  auto load = [&] {
    auto c = load_config(config_path);
    if (output) c.output = *output;
    if (seed) c.seed = *seed;
    return c;
  };

  int N = 3;
  double alpha = 2.0;
  auto* constants = cli.add_subcommand("constants", "sharp constants for (N, alpha) as JSON");
  constants->add_option("--N", N, "dimension")->required();
  constants->add_option("--alpha", alpha, "Riesz order")->required();

  auto* solve = cli.add_subcommand("solve", "ground state: report.json and profile.csv");
  with_config(solve);

  std::string target = "p_upper";
  int steps = 6;
  std::optional<double> critical_gap;
  auto* cont = cli.add_subcommand("continue", "continuation toward a critical exponent: levels.csv");
  with_config(cont);
  cont->add_option("--target", target, "p_upper, p_lower, q_upper or both");
  cont->add_option("--steps", steps, "number of gap halvings");
  cont->add_option("--critical-gap", critical_gap, "extra final step at this gap from the critical exponent");

  std::string case_name = "upper-critical-p";
  std::string scales_text;
  std::optional<std::string> knob;
  double lo = 1e-3, hi = 1e3;
  auto* threshold = cli.add_subcommand("threshold", "test-family margins below a level threshold: margins.json");
  with_config(threshold);
  threshold->add_option("--case", case_name, "upper-critical-p, lower-critical-p, critical-q or doubly-critical");
  threshold->add_option("--scales", scales_text, "comma-separated family scales (default 2^-2..2^-6)");
  threshold->add_option("--search", knob, "bisect lambda or mu for a positive margin");
  threshold->add_option("--lo", lo, "search bracket lower end");
  threshold->add_option("--hi", hi, "search bracket upper end");

  std::optional<unsigned> jobs;
  auto* sweep = cli.add_subcommand("sweep", "solve every cell of the config's sweep grid: summary.csv");
  with_config(sweep);
  sweep->add_option("-j,--jobs", jobs, "parallel cells (CHOQUARD_THREADS overrides)");

  std::string report_dir;
  auto* verify = cli.add_subcommand("verify", "check a solve output directory: verification.json");
  verify->add_option("dir", report_dir, "directory with report.json and profile.csv")->required();

  double p = 0.0, q = 0.0;
  std::string eps_text;
  std::size_t nodes = 2048;
  std::string plain_output = ".";
  auto* bubble = cli.add_subcommand("bubble", "integrals of cut-off bubbles and fitted orders: bubble.csv");
  bubble->add_option("--N", N, "dimension")->required();
  bubble->add_option("--alpha", alpha, "Riesz order")->required();
  bubble->add_option("--p", p, "nonlocal exponent")->required();
  bubble->add_option("--q", q, "local exponent")->required();
  bubble->add_option("--eps", eps_text, "comma-separated dyadic epsilons (default 2^-4..2^-10)");
  bubble->add_option("--nodes", nodes, "grid nodes");
  bubble->add_option("-o,--output", plain_output, "output directory");

  int pairs = 50;
  std::uint64_t hls_seed = 0;
  auto* hls = cli.add_subcommand("hls-check", "HLS ratio over seeded random pairs and the extremal: hls.json");
  hls->add_option("--N", N, "dimension")->required();
  hls->add_option("--alpha", alpha, "Riesz order")->required();
  hls->add_option("--pairs", pairs, "random pairs");
  hls->add_option("--seed", hls_seed, "seed");
  hls->add_option("--nodes", nodes, "grid nodes");
  hls->add_option("-o,--output", plain_output, "output directory");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kInvalidInput;
  }

  std::optional<std::filesystem::path> out_dir;
  if (output) out_dir = *output;
  if (*bubble || *hls) out_dir = plain_output;

  return app::guarded(
      [&]() -> int {
        if (*constants) return app::cmd_constants(N, alpha, std::cout);
        if (*verify) return app::cmd_verify(report_dir);
        if (*bubble) {
          Params P;
          P.N = N;
          P.alpha = alpha;
          P.p = p;
          P.q = q;
          P.validate();
          const auto eps = eps_text.empty() ? app::dyadic(4, 10) : parse_list(eps_text);
          return app::cmd_bubble(P, eps, nodes, plain_output, std::cout);
        }
        if (*hls) return app::cmd_hls_check(N, alpha, pairs, hls_seed, nodes, plain_output, std::cout);

        auto config = load();
        out_dir = config.output;
        if (*solve) return app::cmd_solve(config);
        if (*cont) {
          if (critical_gap) {
            config.solve.continuation.critical_gap = *critical_gap;
            config.solve.validate();
          }
          return app::cmd_continue(config, continuation_target_from_string(target), steps);
        }
        if (*threshold) {
          app::ThresholdRequest request;
          request.kind = threshold_case_from_string(case_name);
          if (!scales_text.empty()) request.scales = parse_list(scales_text);
          if (knob) request.search = knob_from_string(*knob);
          request.lo = lo;
          request.hi = hi;
          return app::cmd_threshold(config, request);
        }
        if (*sweep) return app::cmd_sweep(config, app::thread_count(jobs));
        return app::kOther;
      },
      std::cerr, out_dir);
}
