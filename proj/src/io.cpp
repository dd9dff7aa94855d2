#include "choquard/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidInput(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
  }
}

double number(const Json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw InvalidInput(where + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const Json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

long integer(const Json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw InvalidInput(where + "." + key + " must be an integer");
  return v.get<long>();
}

bool flag_or(const Json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) throw InvalidInput(where + "." + key + " must be true or false");
  return obj.at(key).get<bool>();
}

std::vector<double> number_list(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) return {};
  const auto& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw InvalidInput(where + "." + key + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw InvalidInput(where + "." + key + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Params parse_params(const Json& obj) {
  reject_unknown(obj, "params", {"N", "alpha", "p", "q", "mu", "lambda"});
  for (const char* key : {"N", "alpha", "p", "q", "mu", "lambda"}) {
    if (!obj.contains(key)) throw InvalidInput(std::string("params.") + key + " is required");
  }
  Params P;
  P.N = static_cast<int>(integer(obj, "N", "params"));
  P.alpha = number(obj, "alpha", "params");
  P.p = number(obj, "p", "params");
  P.q = number(obj, "q", "params");
  P.mu = number(obj, "mu", "params");
  P.lambda = number(obj, "lambda", "params");
  P.validate();
  return P;
}

GridSpec parse_grid(const Json& obj, int N) {
  reject_unknown(obj, "grid", {"rmax", "nodes", "scheme", "gamma"});
  GridSpec g = default_grid(N);
  g.rmax = number_or(obj, "rmax", g.rmax, "grid");
  if (obj.contains("nodes")) {
    const long n = integer(obj, "nodes", "grid");
    if (n < 1) throw InvalidInput("grid.nodes must be positive");
    g.nodes = static_cast<std::size_t>(n);
  }
  if (obj.contains("scheme")) {
    if (!obj.at("scheme").is_string()) throw InvalidInput("grid.scheme must be a string");
    g.scheme = grid_scheme_from_string(obj.at("scheme").get<std::string>());
  }
  g.gamma = number_or(obj, "gamma", g.gamma, "grid");
  return g;
}

SolveOptions parse_solve(const Json& obj) {
  reject_unknown(obj, "solve",
                 {"step", "backtrack", "armijo", "tol_residual", "max_iter", "enforce_nonneg", "polish",
                  "polish_below", "max_polish", "continuation"});
  SolveOptions o;
  o.step = number_or(obj, "step", o.step, "solve");
  o.backtrack = number_or(obj, "backtrack", o.backtrack, "solve");
  o.armijo = number_or(obj, "armijo", o.armijo, "solve");
  o.tol_residual = number_or(obj, "tol_residual", o.tol_residual, "solve");
  if (obj.contains("max_iter")) o.max_iter = static_cast<int>(integer(obj, "max_iter", "solve"));
  o.enforce_nonneg = flag_or(obj, "enforce_nonneg", o.enforce_nonneg, "solve");
  o.polish = flag_or(obj, "polish", o.polish, "solve");
  o.polish_below = number_or(obj, "polish_below", o.polish_below, "solve");
  if (obj.contains("max_polish")) o.max_polish = static_cast<int>(integer(obj, "max_polish", "solve"));
  if (obj.contains("continuation")) {
    const auto& c = obj.at("continuation");
    reject_unknown(c, "solve.continuation", {"ratio", "critical_gap"});
    o.continuation.ratio = number_or(c, "ratio", o.continuation.ratio, "solve.continuation");
    o.continuation.critical_gap = number_or(c, "critical_gap", o.continuation.critical_gap, "solve.continuation");
  }
  o.validate();
  return o;
}

InitSpec parse_init(const Json& v) {
  InitSpec s;
  const Json obj = v.is_string() ? Json{{"kind", v}} : v;
  reject_unknown(obj, "init", {"kind", "path"});
  if (!obj.contains("kind") || !obj.at("kind").is_string()) throw InvalidInput("init.kind must be a string");
  const auto kind = obj.at("kind").get<std::string>();
  if (kind == "gaussian") {
    s.kind = InitKind::gaussian;
  } else if (kind == "zero") {
    s.kind = InitKind::zero;
  } else if (kind == "csv") {
    s.kind = InitKind::csv;
    if (!obj.contains("path") || !obj.at("path").is_string()) throw InvalidInput("init.path is required for csv");
    s.path = obj.at("path").get<std::string>();
  } else {
    throw InvalidInput("init.kind must be gaussian, zero or csv (got '" + kind + "')");
  }
  if (s.kind != InitKind::csv && obj.contains("path")) throw InvalidInput("init.path only applies to csv");
  return s;
}

std::string init_name(InitKind k) {
  switch (k) {
    case InitKind::gaussian:
      return "gaussian";
    case InitKind::zero:
      return "zero";
    case InitKind::csv:
      return "csv";
  }
  return "gaussian";
}

Json breakdown_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic}, {"mass", e.mass}, {"nonlocal", e.nonlocal}, {"local", e.local}};
}

}  // namespace

GridSpec default_grid(int N) {
  GridSpec g;
  g.dimension = N;
  g.nodes = 2048;
  g.scheme = GridScheme::graded;
  g.rmax = N == 3 ? 20.0 : 30.0;
  g.gamma = N == 3 ? 3.0 : 4.0;
  return g;
}

RunConfig parse_config(const Json& doc) {
  reject_unknown(doc, "config", {"params", "grid", "solve", "init", "output", "seed", "sweep"});
  if (!doc.contains("params")) throw InvalidInput("config.params is required");
  RunConfig c;
  c.params = parse_params(doc.at("params"));
  c.grid = doc.contains("grid") ? parse_grid(doc.at("grid"), c.params.N) : default_grid(c.params.N);
  c.grid.dimension = c.params.N;
  if (doc.contains("solve")) c.solve = parse_solve(doc.at("solve"));
  if (doc.contains("init")) c.init = parse_init(doc.at("init"));
  if (doc.contains("output")) {
    if (!doc.at("output").is_string()) throw InvalidInput("config.output must be a string");
    c.output = doc.at("output").get<std::string>();
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw InvalidInput("config.seed must be a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    reject_unknown(s, "sweep", {"p", "q", "mu", "lambda"});
    c.sweep.p = number_list(s, "p", "sweep");
    c.sweep.q = number_list(s, "q", "sweep");
    c.sweep.mu = number_list(s, "mu", "sweep");
    c.sweep.lambda = number_list(s, "lambda", "sweep");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto text = read_text(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

Json to_json(const RunConfig& c) {
  Json doc{{"params", to_json(c.params)},
           {"grid", to_json(c.grid)},
           {"solve", to_json(c.solve)},
           {"output", c.output.string()},
           {"seed", c.seed}};
  Json init{{"kind", init_name(c.init.kind)}};
  if (c.init.kind == InitKind::csv) init["path"] = c.init.path.string();
  doc["init"] = init;
  Json sweep = Json::object();
  if (!c.sweep.p.empty()) sweep["p"] = c.sweep.p;
  if (!c.sweep.q.empty()) sweep["q"] = c.sweep.q;
  if (!c.sweep.mu.empty()) sweep["mu"] = c.sweep.mu;
  if (!c.sweep.lambda.empty()) sweep["lambda"] = c.sweep.lambda;
  if (!sweep.empty()) doc["sweep"] = sweep;
  return doc;
}

Json to_json(const Params& p) {
  return {{"N", p.N}, {"alpha", p.alpha}, {"p", p.p}, {"q", p.q}, {"mu", p.mu}, {"lambda", p.lambda}};
}

Json to_json(const GridSpec& g) {
  return {{"rmax", g.rmax}, {"nodes", g.nodes}, {"scheme", to_string(g.scheme)}, {"gamma", g.gamma}};
}

Json to_json(const SolveOptions& o) {
  return {{"step", o.step},
          {"backtrack", o.backtrack},
          {"armijo", o.armijo},
          {"tol_residual", o.tol_residual},
          {"max_iter", o.max_iter},
          {"enforce_nonneg", o.enforce_nonneg},
          {"polish", o.polish},
          {"polish_below", o.polish_below},
          {"max_polish", o.max_polish},
          {"continuation", {{"ratio", o.continuation.ratio}, {"critical_gap", o.continuation.critical_gap}}}};
}

Json to_json(const EnergyBreakdown& e) { return breakdown_json(e); }

Json to_json(const SharpConstants& k) {
  return {{"N", k.N},
          {"alpha", k.alpha},
          {"A_alpha", k.A_alpha},
          {"C_alpha", k.C_alpha},
          {"S", k.S},
          {"S_alpha", k.S_alpha},
          {"S_1", k.S_1},
          {"S_alpha_consistency", k.consistent()}};
}

Json to_json(const SolveReport& r) {
  return {{"params", to_json(r.params)},
          {"grid", to_json(r.profile.grid().spec())},
          {"status", to_string(r.status)},
          {"J", r.J},
          {"P", r.P},
          {"nehari", r.nehari},
          {"residual_norm", r.residual_norm},
          {"iterations", r.iterations},
          {"polish_iterations", r.polish_iterations},
          {"linf", r.linf},
          {"half_mass_radius", r.half_mass_radius},
          {"breakdown", breakdown_json(r.breakdown)},
          {"energy_history", r.energy_history}};
}

Json to_json(const Check& c) {
  Json out{{"name", c.name}, {"measured", c.measured}, {"bound", c.bound}, {"passed", c.passed}};
  if (c.inapplicable) out["inapplicable"] = true;
  if (c.degenerate) out["degenerate"] = true;
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

Json to_json(const VerificationReport& v) {
  Json checks = Json::array();
  for (const auto& c : v.checks) checks.push_back(to_json(c));
  return {{"checks", checks}, {"overall", v.overall}};
}

Json to_json(const ThresholdReport& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"scale", r.scale},
                    {"sup", r.sup},
                    {"tau", r.tau},
                    {"margin", r.margin},
                    {"inconclusive", r.inconclusive}});
  }
  return {{"params", to_json(t.params)},
          {"case", to_string(t.kind)},
          {"threshold", t.threshold},
          {"margins", rows},
          {"all_positive", std::all_of(t.rows.begin(), t.rows.end(), [](const MarginRow& r) { return r.margin > 0.0; })},
          {"positive_for_small", t.positive_for_small},
          {"increasing_as_halved", t.increasing_as_halved},
          {"increasing_in_scale", t.increasing_in_scale},
          {"inconclusive", t.inconclusive}};
}

Json to_json(const KnobSearch& s) {
  Json samples = Json::array();
  for (const auto& [k, m] : s.samples) samples.push_back({{"knob", k}, {"margin", m}});
  return {{"estimate", s.estimate},
          {"lo", s.lo},
          {"hi", s.hi},
          {"holds_at_lower_end", s.holds_at_lower_end},
          {"samples", samples}};
}

Json to_json(const OrderFit& f) {
  return {{"quantity", f.quantity},
          {"stated_order", f.stated_order},
          {"predicted_order", f.predicted_order},
          {"log_power", f.log_power},
          {"fitted_order", f.fitted_order},
          {"amplitude", f.amplitude},
          {"points", f.points},
          {"agrees", f.agrees},
          {"asserted", f.asserted}};
}

Json to_json(const AsymptoticTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"epsilon", r.epsilon}, {"integrals", breakdown_json(r.integrals)}, {"resolved", r.resolved}});
  }
  Json fits = Json::array();
  for (const auto& f : t.fits) fits.push_back(to_json(f));
  return {{"params", to_json(t.params)},
          {"sobolev_level", t.sobolev_level},
          {"nonlocal_limit", t.nonlocal_limit},
          {"rows", rows},
          {"fits", fits}};
}

std::uint64_t config_hash(const Json& doc) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string profile_csv(const RadialField& u) {
  std::string out = "r,u\n";
  const auto r = u.grid().nodes();
  for (std::size_t i = 0; i < u.size(); ++i) out += format_double(r[i]) + "," + format_double(u[i]) + "\n";
  return out;
}

RadialField read_profile_csv(const std::filesystem::path& path, const GridPtr& grid) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("r,u", 0) != 0) throw IoError(path.string() + ": expected header r,u");
  std::vector<double> r, u;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError(path.string() + ": malformed row '" + line + "'");
    try {
      r.push_back(std::stod(line.substr(0, comma)));
      u.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
    if (r.size() > 1 && !(r.back() > r[r.size() - 2])) throw IoError(path.string() + ": radii must increase");
  }
  if (r.size() < 2) throw IoError(path.string() + ": needs at least two rows");
  return RadialField::sample(grid, [&](double x) {
    if (x > r.back()) return 0.0;
    if (x <= r.front()) return u.front();
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - r.begin());
    const double t = (x - r[k - 1]) / (r[k] - r[k - 1]);
    return (1.0 - t) * u[k - 1] + t * u[k];
  });
}

std::string levels_csv(const std::vector<SolveReport>& reports, SolveStatus verdict) {
  std::string out = "step,p,q,J,P,linf,status\n";
  for (std::size_t n = 0; n < reports.size(); ++n) {
    const auto& r = reports[n];
    auto status = r.status;
    if (n + 1 == reports.size() && verdict != SolveStatus::converged) status = verdict;
    out += std::to_string(n) + "," + format_double(r.params.p) + "," + format_double(r.params.q) + "," +
           format_double(r.J) + "," + format_double(r.P) + "," + format_double(r.linf) + "," + to_string(status) +
           "\n";
  }
  return out;
}

std::string bubble_csv(const AsymptoticTable& table) {
  std::string out = "eps,a,b,c,d\n";
  for (const auto& row : table.rows) {
    const auto& e = row.integrals;
    out += format_double(row.epsilon) + "," + format_double(e.kinetic) + "," + format_double(e.mass) + "," +
           format_double(e.nonlocal) + "," + format_double(e.local) + "\n";
  }
  for (const auto& f : table.fits) {
    std::ostringstream os;
    os.precision(6);
    os << "# fit " << f.quantity << " order " << f.fitted_order << " predicted " << f.predicted_order << " stated "
       << f.stated_order << " log_power " << f.log_power << " points " << f.points << " agrees "
       << (f.agrees ? "yes" : "no") << (f.asserted ? "" : " (informational)") << "\n";
    out += os.str();
  }
  return out;
}

}  // namespace choquard
