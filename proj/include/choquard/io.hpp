#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "choquard/extremals.hpp"
#include "choquard/solver.hpp"
#include "choquard/verify.hpp"

namespace choquard {

using Json = nlohmann::json;

enum class InitKind { gaussian, zero, csv };

struct InitSpec {
  InitKind kind = InitKind::gaussian;
  std::filesystem::path path;  // profile CSV for InitKind::csv
};

/// Values each swept parameter takes; empty lists keep the template value.
struct SweepAxes {
  std::vector<double> p, q, mu, lambda;
};

/// One run, as read from a JSON document. Every physical parameter must be given; grid and
/// solver settings fall back to defaults.
struct RunConfig {
  Params params;
  GridSpec grid;
  SolveOptions solve;
  InitSpec init;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  SweepAxes sweep;
};

/// Default grid for dimension N: graded, 2048 nodes, rmax 20 (N = 3) or 30, gamma 3 (N = 3) or 4.
GridSpec default_grid(int N);

/// Strict parse: unknown keys and missing physical parameters throw InvalidInput.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::filesystem::path& path);
Json to_json(const RunConfig& config);

Json to_json(const Params& p);
Json to_json(const GridSpec& g);
Json to_json(const SolveOptions& o);
Json to_json(const EnergyBreakdown& e);
Json to_json(const SharpConstants& k);
Json to_json(const SolveReport& r);  // everything but the profile
Json to_json(const Check& c);
Json to_json(const VerificationReport& v);
Json to_json(const ThresholdReport& t);
Json to_json(const KnobSearch& s);
Json to_json(const OrderFit& f);
Json to_json(const AsymptoticTable& t);

/// 64-bit FNV-1a of the canonical (key-sorted, compact) dump.
std::uint64_t config_hash(const Json& doc);
std::string hex(std::uint64_t h);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& doc);

/// `r,u` rows.
std::string profile_csv(const RadialField& u);
/// Reads `r,u` rows and interpolates them onto grid (zero beyond the last row).
RadialField read_profile_csv(const std::filesystem::path& path, const GridPtr& grid);

/// `step,p,q,J,P,linf,status`; the last row carries the dichotomy verdict when the run did
/// not converge.
std::string levels_csv(const std::vector<SolveReport>& reports, SolveStatus verdict);

/// `eps,a,b,c,d` rows, then one `# fit` comment line per fitted quantity.
std::string bubble_csv(const AsymptoticTable& table);

}  // namespace choquard
