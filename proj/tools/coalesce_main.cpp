#include <charconv>
#include <iostream>
#include <optional>
#include <string>

#include "coalesce/config.h"
#include "coalesce/experiment.h"

namespace {

constexpr const char* kUsage =
    "usage: coalesce <simulate|theory|compare|sweep> --config <path>\n"
    "                [--seed <u64>] [--trials <int>] [--out <dir>]\n"
    "                [--threshold <float>]\n"
    "\n"
    "subcommands:\n"
    "  simulate   run trials; write trial_summary.csv and events.csv\n"
    "  theory     write the distribution table (pmf and/or envelope)\n"
    "  compare    fit empirical vs exact law; write fit_report.json\n"
    "  sweep      per-c monotonicity table over sweep.c_values\n"
    "\n"
    "environment:\n"
    "  COALESCE_LOG=error|info|debug   stderr verbosity (default error)\n"
    "\n"
    "exit status: 0 gates passed, 1 gate failed, 2 usage/config error\n";

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n\n" << kUsage;
  return 2;
}

template <typename T>
std::optional<T> parse_number(const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) return std::nullopt;
  return value;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return usage_error("missing subcommand");
  const std::string command = argv[1];
  if (command == "-h" || command == "--help" || command == "help") {
    std::cout << kUsage;
    return 0;
  }
  if (command != "simulate" && command != "theory" && command != "compare" &&
      command != "sweep")
    return usage_error("unknown subcommand \"" + command + "\"");

  std::optional<std::string> config_path;
  coalesce::CliOverrides overrides;
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    if (i + 1 >= argc)
      return usage_error(flag.rfind("--", 0) == 0
                             ? flag + " needs a value"
                             : "unexpected argument \"" + flag + "\"");
    const std::string value = argv[++i];
    if (flag == "--config") {
      config_path = value;
    } else if (flag == "--seed") {
      const auto seed = parse_number<std::uint64_t>(value);
      if (!seed) return usage_error("--seed needs an unsigned integer");
      overrides.seed = *seed;
    } else if (flag == "--trials") {
      const auto trials = parse_number<std::int64_t>(value);
      if (!trials) return usage_error("--trials needs an integer");
      overrides.trials = *trials;
    } else if (flag == "--out") {
      overrides.out = value;
    } else if (flag == "--threshold") {
      const auto threshold = parse_number<double>(value);
      if (!threshold) return usage_error("--threshold needs a number");
      overrides.threshold = *threshold;
    } else {
      return usage_error("unknown flag \"" + flag + "\"");
    }
  }
  if (!config_path) return usage_error("--config is required");

  try {
    coalesce::ExperimentConfig config =
        coalesce::parse_config_file(*config_path);
    coalesce::apply_overrides(config, overrides);
    coalesce::validate(config);
    if (command == "simulate") return coalesce::run_simulate(config);
    if (command == "theory") return coalesce::run_theory(config);
    if (command == "compare") return coalesce::run_compare(config);
    return coalesce::run_sweep(config);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
