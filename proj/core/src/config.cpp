#include "coalesce/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "coalesce/csv.h"

namespace coalesce {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& key, const std::string& reason) {
  throw std::invalid_argument("config: " + key + ": " + reason);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end)
    fail(key, "expected a number, got \"" + value + "\"");
  return out;
}

std::int64_t parse_i64(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end)
    fail(key, "expected an integer, got \"" + value + "\"");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto result = std::from_chars(begin, end, out);
  if (result.ec != std::errc() || result.ptr != end)
    fail(key, "expected an unsigned integer, got \"" + value + "\"");
  return out;
}

std::vector<std::string> split(const std::string& value, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(value);
  while (std::getline(in, part, sep)) parts.push_back(trim(part));
  return parts;
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& part : split(value, ',')) {
    if (part.empty()) fail(key, "empty entry in list \"" + value + "\"");
    out.push_back(parse_double(key, part));
  }
  if (out.empty()) fail(key, "expected a comma-separated list");
  return out;
}

// "x,y; x,y" with ';' between states and ',' between coordinates.
std::vector<std::vector<double>> parse_states(const std::string& key,
                                              const std::string& value) {
  std::vector<std::vector<double>> out;
  for (const std::string& part : split(value, ';')) {
    if (part.empty()) fail(key, "empty state in \"" + value + "\"");
    out.push_back(parse_double_list(key, part));
  }
  if (out.empty()) fail(key, "expected states as \"x,y; x,y\"");
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ",";
    out += csv::format_double(values[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  ": empty key");
    if (!pairs.emplace(key, value).second) fail(key, "duplicate key");
  }

  ExperimentConfig config;
  const std::map<std::string, std::function<void(const std::string&)>> handlers{
      {"n", [&](const std::string& v) { config.n = parse_i64("n", v); }},
      {"m",
       [&](const std::string& v) {
         config.m = static_cast<int>(parse_i64("m", v));
       }},
      {"payoff.kind",
       [&](const std::string& v) { config.payoff.kind = v; }},
      {"payoff.theta",
       [&](const std::string& v) {
         config.payoff.theta = parse_double("payoff.theta", v);
       }},
      {"payoff.lambda",
       [&](const std::string& v) {
         config.payoff.lambda = parse_double("payoff.lambda", v);
       }},
      {"payoff.c",
       [&](const std::string& v) {
         config.payoff.c = parse_double("payoff.c", v);
       }},
      {"payoff.g_coeffs",
       [&](const std::string& v) {
         config.payoff.g_coeffs = parse_double_list("payoff.g_coeffs", v);
       }},
      {"payoff.f_coeffs",
       [&](const std::string& v) {
         config.payoff.f_coeffs = parse_double_list("payoff.f_coeffs", v);
       }},
      {"init.kind", [&](const std::string& v) { config.init.kind = v; }},
      {"init.box_lo",
       [&](const std::string& v) {
         config.init.box_lo = parse_double("init.box_lo", v);
       }},
      {"init.box_hi",
       [&](const std::string& v) {
         config.init.box_hi = parse_double("init.box_hi", v);
       }},
      {"init.min_separation",
       [&](const std::string& v) {
         config.init.min_separation = parse_double("init.min_separation", v);
       }},
      {"init.states",
       [&](const std::string& v) {
         config.init.states = parse_states("init.states", v);
       }},
      {"pair_policy", [&](const std::string& v) { config.pair_policy = v; }},
      {"trials",
       [&](const std::string& v) { config.trials = parse_i64("trials", v); }},
      {"master_seed",
       [&](const std::string& v) {
         config.master_seed = parse_u64("master_seed", v);
       }},
      {"step_cap_factor",
       [&](const std::string& v) {
         config.step_cap_factor = parse_double("step_cap_factor", v);
       }},
      {"output_dir",
       [&](const std::string& v) { config.output_dir = v; }},
      {"run.workers",
       [&](const std::string& v) {
         config.workers = static_cast<int>(parse_i64("run.workers", v));
       }},
      {"compare.tv_threshold",
       [&](const std::string& v) {
         config.tv_threshold = parse_double("compare.tv_threshold", v);
       }},
      {"compare.empirical",
       [&](const std::string& v) { config.compare_empirical = v; }},
      {"sweep.c_values",
       [&](const std::string& v) {
         config.sweep_c = parse_double_list("sweep.c_values", v);
       }},
      {"sweep.trials",
       [&](const std::string& v) {
         config.sweep_trials = parse_i64("sweep.trials", v);
       }},
  };

  for (const auto& [key, value] : pairs) {
    const auto handler = handlers.find(key);
    if (handler == handlers.end()) fail(key, "unknown key");
    handler->second(value);
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open \"" + path + "\"");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides) {
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.trials) config.trials = *overrides.trials;
  if (overrides.out) config.output_dir = *overrides.out;
  if (overrides.threshold) config.tv_threshold = *overrides.threshold;
}

void validate(const ExperimentConfig& config) {
  if (config.n < 2) fail("n", "need at least 2 agents");
  if (config.m < 1) fail("m", "state dimension must be >= 1");

  if (config.payoff.kind == "power_law") {
    if (!(config.payoff.theta > 0.0)) fail("payoff.theta", "must be > 0");
    if (!(config.payoff.lambda > 0.0)) fail("payoff.lambda", "must be > 0");
    if (!(config.payoff.c > 0.0) || !(config.payoff.c < 1.0))
      fail("payoff.c", "must be in (0,1)");
  } else if (config.payoff.kind == "polynomial") {
    if (config.payoff.g_coeffs.empty())
      fail("payoff.g_coeffs", "required for polynomial payoffs");
    if (config.payoff.f_coeffs.empty())
      fail("payoff.f_coeffs", "required for polynomial payoffs");
  } else {
    fail("payoff.kind", "expected power_law or polynomial, got \"" +
                            config.payoff.kind + "\"");
  }

  if (config.init.kind == "box") {
    if (!(config.init.box_lo < config.init.box_hi))
      fail("init.box_lo", "need box_lo < box_hi");
  } else if (config.init.kind == "explicit") {
    if (static_cast<std::int64_t>(config.init.states.size()) != config.n)
      fail("init.states", "need exactly n states, got " +
                              std::to_string(config.init.states.size()));
    for (const auto& state : config.init.states)
      if (static_cast<int>(state.size()) != config.m)
        fail("init.states", "every state needs m coordinates");
  } else {
    fail("init.kind",
         "expected box or explicit, got \"" + config.init.kind + "\"");
  }
  if (!(config.init.min_separation > 0.0))
    fail("init.min_separation", "must be > 0");

  if (config.pair_policy != "uniform" && config.pair_policy != "size_weighted")
    fail("pair_policy", "expected uniform or size_weighted, got \"" +
                            config.pair_policy + "\"");
  if (config.trials < 1) fail("trials", "must be >= 1");
  if (!config.master_seed)
    fail("master_seed", "required (runs are never wall-clock seeded)");
  if (!(config.step_cap_factor > 0.0)) fail("step_cap_factor", "must be > 0");
  if (config.output_dir.empty()) fail("output_dir", "must not be empty");
  if (config.workers < 1) fail("run.workers", "must be >= 1");
  if (!(config.tv_threshold > 0.0)) fail("compare.tv_threshold", "must be > 0");
  for (std::size_t i = 0; i < config.sweep_c.size(); ++i) {
    if (!(config.sweep_c[i] > 0.0) || !(config.sweep_c[i] < 1.0))
      fail("sweep.c_values", "entries must be in (0,1)");
    if (i > 0 && !(config.sweep_c[i] > config.sweep_c[i - 1]))
      fail("sweep.c_values", "must be strictly increasing");
  }
  if (config.sweep_trials < 0) fail("sweep.trials", "must be >= 0");
}

std::string serialize(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "n = " << config.n << "\n";
  out << "m = " << config.m << "\n";
  out << "payoff.kind = " << config.payoff.kind << "\n";
  if (config.payoff.kind == "polynomial") {
    out << "payoff.g_coeffs = " << join_doubles(config.payoff.g_coeffs) << "\n";
    out << "payoff.f_coeffs = " << join_doubles(config.payoff.f_coeffs) << "\n";
  } else {
    out << "payoff.theta = " << csv::format_double(config.payoff.theta) << "\n";
    out << "payoff.lambda = " << csv::format_double(config.payoff.lambda)
        << "\n";
    out << "payoff.c = " << csv::format_double(config.payoff.c) << "\n";
  }
  out << "init.kind = " << config.init.kind << "\n";
  if (config.init.kind == "explicit") {
    out << "init.states = ";
    for (std::size_t i = 0; i < config.init.states.size(); ++i) {
      if (i > 0) out << "; ";
      out << join_doubles(config.init.states[i]);
    }
    out << "\n";
  } else {
    out << "init.box_lo = " << csv::format_double(config.init.box_lo) << "\n";
    out << "init.box_hi = " << csv::format_double(config.init.box_hi) << "\n";
  }
  out << "init.min_separation = " << csv::format_double(config.init.min_separation)
      << "\n";
  out << "pair_policy = " << config.pair_policy << "\n";
  out << "trials = " << config.trials << "\n";
  if (config.master_seed) out << "master_seed = " << *config.master_seed << "\n";
  out << "step_cap_factor = " << csv::format_double(config.step_cap_factor)
      << "\n";
  out << "output_dir = " << config.output_dir << "\n";
  out << "run.workers = " << config.workers << "\n";
  out << "compare.tv_threshold = " << csv::format_double(config.tv_threshold)
      << "\n";
  if (!config.compare_empirical.empty())
    out << "compare.empirical = " << config.compare_empirical << "\n";
  if (!config.sweep_c.empty()) {
    out << "sweep.c_values = " << join_doubles(config.sweep_c) << "\n";
    out << "sweep.trials = " << config.sweep_trials << "\n";
  }
  return out.str();
}

PayoffSpec build_payoff(const ExperimentConfig& config) {
  if (config.payoff.kind == "power_law")
    return PayoffSpec::power_law(config.payoff.theta, config.payoff.lambda,
                                 config.payoff.c);
  if (config.payoff.kind == "polynomial")
    return PayoffSpec::polynomial(config.payoff.g_coeffs,
                                  config.payoff.f_coeffs);
  fail("payoff.kind", "expected power_law or polynomial");
}

InitRule build_init_rule(const ExperimentConfig& config) {
  if (config.init.kind == "explicit")
    return InitRule::explicit_states(config.init.states,
                                     config.init.min_separation);
  if (config.init.kind == "box")
    return InitRule::box(config.init.box_lo, config.init.box_hi,
                         config.init.min_separation);
  fail("init.kind", "expected box or explicit");
}

PairPolicy build_pair_policy(const ExperimentConfig& config) {
  if (config.pair_policy == "uniform") return PairPolicy::Uniform;
  if (config.pair_policy == "size_weighted") return PairPolicy::SizeWeighted;
  fail("pair_policy", "expected uniform or size_weighted");
}

}  // namespace coalesce
