#include "app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include "choquard/errors.hpp"
#include "choquard/riesz.hpp"
#include "choquard/sampling.hpp"

namespace choquard::app {

namespace fs = std::filesystem;

unsigned thread_count(std::optional<unsigned> requested) {
  if (const char* env = std::getenv("CHOQUARD_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw InvalidInput(std::string("CHOQUARD_THREADS must be a positive integer (got '") + env + "')");
    return static_cast<unsigned>(n);
  }
  if (requested) {
    if (*requested < 1) throw InvalidInput("thread count must be positive");
    return *requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> dyadic(int first, int last) {
  if (first > last) throw InvalidInput("dyadic range is empty");
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

namespace {

int status_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return kOk;
    case SolveStatus::vanishing:
    case SolveStatus::concentrating:
      return kDichotomy;
    case SolveStatus::max_iter:
      return kOther;
  }
  return kOther;
}

RadialField initial_guess(const RunConfig& config, const GridPtr& grid) {
  switch (config.init.kind) {
    case InitKind::gaussian:
      return gaussian_guess(grid);
    case InitKind::zero:
      return RadialField::zeros(grid);
    case InitKind::csv:
      return read_profile_csv(config.init.path, grid);
  }
  return gaussian_guess(grid);
}

SolveReport run_solve(const RunConfig& config) {
  const auto grid = build_grid(config.grid);
  return ground_state(Problem(config.params, grid), initial_guess(config, grid), config.solve);
}

void write_report(const fs::path& dir, const SolveReport& rep) {
  write_json(dir / "report.json", to_json(rep));
  write_text(dir / "profile.csv", profile_csv(rep.profile));
}

Json error_json(const std::string& kind, const std::string& message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

}  // namespace

int guarded(const std::function<int()>& body, std::ostream& err, const std::optional<fs::path>& output) {
  auto fail = [&](int code, const std::string& kind, const std::string& message) {
    const auto doc = error_json(kind, message);
    err << doc.dump() << "\n";
    if (output) {
      try {
        write_json(*output / "error.json", doc);
      } catch (const IoError&) {
      }
    }
    return code;
  };
  try {
    return body();
  } catch (const InvalidInput& e) {
    return fail(kInvalidInput, "invalid_input", e.what());
  } catch (const DegenerateInput& e) {
    return fail(kInvalidInput, "degenerate_input", e.what());
  } catch (const IoError& e) {
    return fail(kIo, "io", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kIo, "io", e.what());
  } catch (const NumericalFailure& e) {
    return fail(kOther, "numerical_failure", e.what());
  } catch (const std::exception& e) {
    return fail(kOther, "internal", e.what());
  }
}

int cmd_constants(int N, double alpha, std::ostream& out) {
  out << to_json(sharp_constants(N, alpha)).dump(2) << "\n";
  return kOk;
}

int cmd_solve(const RunConfig& config) {
  const auto rep = run_solve(config);
  write_report(config.output, rep);
  return status_code(rep.status);
}

int cmd_continue(const RunConfig& config, ContinuationTarget target, int steps) {
  const auto grid = build_grid(config.grid);
  const auto reports =
      continue_exponent(config.params, target, steps, grid, config.solve, initial_guess(config, grid));
  const auto verdict = detect_dichotomy(reports);
  write_text(config.output / "levels.csv", levels_csv(reports, verdict));
  Json all = Json::array();
  for (const auto& r : reports) all.push_back(to_json(r));
  write_json(config.output / "reports.json", {{"target", to_string(target)}, {"verdict", to_string(verdict)}, {"reports", all}});
  write_text(config.output / "profile.csv", profile_csv(reports.back().profile));
  if (verdict != SolveStatus::converged) return kDichotomy;
  const bool all_converged = std::all_of(reports.begin(), reports.end(),
                                         [](const SolveReport& r) { return r.status == SolveStatus::converged; });
  return all_converged ? kOk : kOther;
}

int cmd_threshold(const RunConfig& config, const ThresholdRequest& request) {
  const auto scales = request.scales.empty() ? dyadic(2, 6) : request.scales;
  const auto report = threshold_check(config.params, request.kind, scales);
  write_json(config.output / "margins.json", to_json(report));
  if (request.search) {
    const auto found =
        critical_parameter_search(config.params, *request.search, request.kind, scales, request.lo, request.hi);
    Json doc = to_json(found);
    doc["knob"] = to_string(*request.search);
    doc["case"] = to_string(request.kind);
    write_json(config.output / "search.json", doc);
    return kOk;
  }
  const bool positive =
      std::all_of(report.rows.begin(), report.rows.end(), [](const MarginRow& r) { return r.margin > 0.0; });
  return positive ? kOk : kOther;
}

namespace {

struct Cell {
  Params params;
  Json doc;  // the cell's full config without output and sweep
  std::string id;
};

std::vector<Cell> sweep_cells(const RunConfig& config) {
  auto axis = [](const std::vector<double>& values, double fallback) {
    return values.empty() ? std::vector<double>{fallback} : values;
  };
  std::map<std::string, Cell> unique;
  for (double p : axis(config.sweep.p, config.params.p)) {
    for (double q : axis(config.sweep.q, config.params.q)) {
      for (double mu : axis(config.sweep.mu, config.params.mu)) {
        for (double lambda : axis(config.sweep.lambda, config.params.lambda)) {
          RunConfig c = config;
          c.params.p = p;
          c.params.q = q;
          c.params.mu = mu;
          c.params.lambda = lambda;
          c.sweep = {};
          c.output = "";
          auto doc = to_json(c);
          doc.erase("output");
          const auto id = "cell_" + hex(config_hash(doc));
          unique.emplace(id, Cell{c.params, doc, id});
        }
      }
    }
  }
  std::vector<Cell> cells;
  for (auto& [id, cell] : unique) cells.push_back(std::move(cell));
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    const auto& x = a.params;
    const auto& y = b.params;
    return std::tie(x.p, x.q, x.mu, x.lambda, a.id) < std::tie(y.p, y.q, y.mu, y.lambda, b.id);
  });
  return cells;
}

}  // namespace

int cmd_sweep(const RunConfig& config, unsigned threads) {
  if (threads < 1) throw InvalidInput("thread count must be positive");
  const auto cells = sweep_cells(config);
  std::vector<std::string> rows(cells.size());
  std::vector<int> codes(cells.size(), kOther);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells.size(); k = next++) {
      const auto& cell = cells[k];
      const auto dir = config.output / cell.id;
      std::string status, J, P, residual, error;
      try {
        RunConfig c = parse_config(cell.doc);
        c.output = dir;
        const auto rep = run_solve(c);
        write_report(dir, rep);
        status = to_string(rep.status);
        J = format_double(rep.J);
        P = format_double(rep.P);
        residual = format_double(rep.residual_norm);
        codes[k] = status_code(rep.status);
      } catch (const std::exception& e) {
        status = "error";
        error = e.what();
        std::replace(error.begin(), error.end(), ',', ';');
        std::replace(error.begin(), error.end(), '\n', ' ');
        try {
          write_json(dir / "error.json", error_json("cell", e.what()));
        } catch (const std::exception&) {
        }
      }
      const auto& p = cell.params;
      rows[k] = cell.id + "," + format_double(p.p) + "," + format_double(p.q) + "," + format_double(p.mu) + "," +
                format_double(p.lambda) + "," + status + "," + J + "," + P + "," + residual + "," + error + "\n";
    }
  };
  const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string summary = "cell,p,q,mu,lambda,status,J,P,residual,error\n";
  for (const auto& r : rows) summary += r;
  write_text(config.output / "summary.csv", summary);
  return std::all_of(codes.begin(), codes.end(), [](int c) { return c == kOk; }) ? kOk : kOther;
}

int cmd_verify(const fs::path& dir) {
  Json doc;
  try {
    doc = Json::parse(read_text(dir / "report.json"));
  } catch (const Json::exception& e) {
    throw IoError((dir / "report.json").string() + ": " + e.what());
  }
  Json cfg{{"params", doc.at("params")}, {"grid", doc.at("grid")}};
  const auto config = parse_config(cfg);
  const auto grid = build_grid(config.grid);
  const auto profile = read_profile_csv(dir / "profile.csv", grid);
  const Problem problem(config.params, grid);
  const auto status = solve_status_from_string(doc.at("status").get<std::string>());
  auto rep = assess(problem, profile, status);
  const auto v = verify(rep);
  write_json(dir / "verification.json", to_json(v));
  return v.overall ? kOk : kOther;
}

int cmd_bubble(const Params& params, const std::vector<double>& epsilons, std::size_t nodes, const fs::path& output,
               std::ostream& out) {
  BubbleResolution res;
  res.nodes = nodes;
  const auto table = asymptotic_suite(params, epsilons, res);
  const auto csv = bubble_csv(table);
  write_text(output / "bubble.csv", csv);
  write_json(output / "bubble.json", to_json(table));
  out << csv;
  const bool ok = std::all_of(table.fits.begin(), table.fits.end(),
                              [](const OrderFit& f) { return f.agrees || !f.asserted; });
  return ok ? kOk : kOther;
}

int cmd_hls_check(int N, double alpha, int pairs, std::uint64_t seed, std::size_t nodes, const fs::path& output,
                  std::ostream& out) {
  if (pairs < 1) throw InvalidInput("hls-check needs at least one pair");
  const double C = hls_constant(N, alpha);
  const auto fields = build_grid(N, 20.0, nodes, GridScheme::graded, 2.0);
  const auto wide = build_grid(N, 1000.0, nodes, GridScheme::graded, 3.0);
  Sampler sampler(seed);
  double worst = 0.0;
  Json ratios = Json::array();
  for (int k = 0; k < pairs; ++k) {
    const auto u = sampler.positive_field(fields);
    const auto v = sampler.positive_field(fields);
    const double r = hls_ratio(u, v, alpha);
    worst = std::max(worst, r);
    ratios.push_back(r);
  }
  const auto extremal = RadialField::sample(wide, [&](double r) { return std::pow(1.0 + r * r, -0.5 * (N + alpha)); });
  const double best = hls_ratio(extremal, extremal, alpha);
  const bool bound_holds = worst <= C * (1.0 + 1e-3);
  const bool extremal_close = best >= 0.98 * C;
  const Json doc{{"N", N},
                 {"alpha", alpha},
                 {"seed", seed},
                 {"hls_constant", C},
                 {"worst_ratio", worst},
                 {"extremal_ratio", best},
                 {"bound_holds", bound_holds},
                 {"extremal_within_2_percent", extremal_close},
                 {"ratios", ratios}};
  write_json(output / "hls.json", doc);
  out << doc.dump(2) << "\n";
  return bound_holds && extremal_close ? kOk : kOther;
}

}  // namespace choquard::app
