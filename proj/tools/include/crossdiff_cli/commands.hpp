#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <crossdiff/models.hpp>

namespace crossdiff::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitSolver = 2,
  kExitCheckFailed = 3,
};

/// Runs `body`, mapping library exceptions to exit codes with a one-line
/// diagnostic on `err`.
int guarded(std::ostream& err, const std::function<int()>& body);

int cmd_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_convergence(const std::filesystem::path& config, bool full_scale, std::ostream& out, std::ostream& err);
int cmd_decay(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

struct CheckOptions {
  std::uint64_t seed = 20240611;
  std::size_t samples = 10000;
  /// Negative control: replaces the Maxwell–Stefan A_sigma by a slightly
  /// wrong one, so the consistency checks must fail.
  bool perturb_model = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_check_suite(const CheckOptions& options);
int cmd_check(const CheckOptions& options, std::ostream& out, std::ostream& err);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace crossdiff::cli
