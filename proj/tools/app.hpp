#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "choquard/io.hpp"

namespace choquard::app {

enum ExitCode : int { kOk = 0, kOther = 1, kDichotomy = 2, kInvalidInput = 3, kIo = 4 };

/// Worker count: CHOQUARD_THREADS when set, else the requested value, else the hardware count.
unsigned thread_count(std::optional<unsigned> requested);

int cmd_constants(int N, double alpha, std::ostream& out);

/// report.json and profile.csv in config.output.
int cmd_solve(const RunConfig& config);

/// levels.csv, reports.json and the last profile in config.output.
int cmd_continue(const RunConfig& config, ContinuationTarget target, int steps);

struct ThresholdRequest {
  ThresholdCase kind = ThresholdCase::upper_critical_p;
  std::vector<double> scales;
  std::optional<Knob> search;  // bisect this parameter for a positive margin
  double lo = 1e-3;
  double hi = 1e3;
};

/// margins.json (and search.json with a search) in config.output.
int cmd_threshold(const RunConfig& config, const ThresholdRequest& request);

/// One subdirectory per distinct cell and summary.csv in config.output.
int cmd_sweep(const RunConfig& config, unsigned threads);

/// verification.json next to report.json and profile.csv in dir.
int cmd_verify(const std::filesystem::path& dir);

/// bubble.csv and bubble.json in output.
int cmd_bubble(const Params& params, const std::vector<double>& epsilons, std::size_t nodes,
               const std::filesystem::path& output, std::ostream& out);

/// hls.json in output: worst ratio over random pairs and the ratio of the extremal.
int cmd_hls_check(int N, double alpha, int pairs, std::uint64_t seed, std::size_t nodes,
                  const std::filesystem::path& output, std::ostream& out);

/// Runs body, mapping exceptions to exit codes and a JSON error on err (and error.json in
/// output when given).
int guarded(const std::function<int()>& body, std::ostream& err, const std::optional<std::filesystem::path>& output);

/// Dyadic epsilons 2^-first .. 2^-last.
std::vector<double> dyadic(int first, int last);

}  // namespace choquard::app
