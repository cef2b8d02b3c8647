#include "mirrorstrat/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "mirrorstrat/errors.hpp"

namespace mirrorstrat {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::map<std::string, Entry> split_lines(std::string_view text) {
  std::map<std::string, Entry> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const std::string_view line = trim(strip_comment(text.substr(pos, end - pos)));
    pos = end + 1;
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string_view::npos) {
      fail(line_no, "tables are not supported");
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    if (!out.emplace(key, Entry{std::string(value), line_no}).second) {
      fail(line_no, "duplicate key '" + key + "'");
    }
  }
  return out;
}

template <class T>
T parse_number(const Entry& e, const std::string& key) {
  T v{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) fail(e.line, "'" + key + "' expects a number, got " + e.value);
  return v;
}

std::string parse_string(const Entry& e, const std::string& key) {
  const std::string& v = e.value;
  if (v.size() < 2 || v.front() != '"' || v.back() != '"' ||
      v.find('"', 1) != v.size() - 1) {
    fail(e.line, "'" + key + "' expects a quoted string, got " + v);
  }
  return v.substr(1, v.size() - 2);
}

std::vector<int> parse_int_array(const Entry& e, const std::string& key) {
  const std::string& v = e.value;
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    fail(e.line, "'" + key + "' expects an integer array like [1, 2, 3]");
  }
  std::vector<int> out;
  std::stringstream items(v.substr(1, v.size() - 2));
  std::string item;
  while (std::getline(items, item, ',')) {
    const std::string_view t = trim(item);
    if (t.empty()) {
      if (items.eof()) break;  // "[ ]"
      fail(e.line, "'" + key + "' has an empty element");
    }
    out.push_back(parse_number<int>(Entry{std::string(t), e.line}, key));
  }
  return out;
}

template <class T>
T pick(const Entry& e, const std::string& key, const std::map<std::string, T>& choices) {
  const std::string s = parse_string(e, key);
  const auto it = choices.find(s);
  if (it == choices.end()) {
    std::string allowed;
    for (const auto& [name, value] : choices) allowed += (allowed.empty() ? "" : ", ") + name;
    fail(e.line, "'" + key + "' must be one of " + allowed + ", got \"" + s + "\"");
  }
  return it->second;
}

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string int_array(const std::vector<int>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  auto entries = split_lines(text);

  ExperimentConfig c;
  if (const auto it = entries.find("regularizer"); it != entries.end()) {
    const auto family = pick<RegularizerFamily>(
        it->second, "regularizer",
        {{"l1", RegularizerFamily::kL1}, {"group", RegularizerFamily::kGroup},
         {"nuclear", RegularizerFamily::kNuclear}});
    if (family == RegularizerFamily::kNuclear) c = ExperimentConfig::nuclear_default();
    c.family = family;
    entries.erase(it);
  }

  bool unknowns_given = false;
  for (const auto& [key, e] : entries) {
    if (key == "N") {
      c.unknowns = parse_number<std::size_t>(e, key);
      unknowns_given = true;
    } else if (key == "P") {
      c.measurements = parse_number<std::size_t>(e, key);
    } else if (key == "block_size") {
      c.block_size = parse_number<std::size_t>(e, key);
    } else if (key == "side") {
      c.side = parse_number<std::size_t>(e, key);
    } else if (key == "r0_target") {
      c.r0_target = parse_number<std::size_t>(e, key);
    } else if (key == "trials") {
      c.trials = parse_number<int>(e, key);
    } else if (key == "path_iters") {
      c.path_iters = parse_number<int>(e, key);
    } else if (key == "reference_max_iters") {
      c.reference_max_iters = parse_number<int>(e, key);
    } else if (key == "certificate_max_iters") {
      c.certificate.max_iters = parse_number<int>(e, key);
    } else if (key == "master_seed") {
      c.master_seed = parse_number<std::uint64_t>(e, key);
    } else if (key == "noise_std") {
      c.noise_std = parse_number<double>(e, key);
    } else if (key == "lambda") {
      c.lambda = parse_number<double>(e, key);
    } else if (key == "c0") {
      c.c0 = parse_number<double>(e, key);
    } else if (key == "lambda_floor") {
      c.lambda_floor = parse_number<double>(e, key);
    } else if (key == "gamma_factor") {
      c.gamma_factor = parse_number<double>(e, key);
    } else if (key == "tau") {
      c.tau = parse_number<double>(e, key);
    } else if (key == "stop_tol") {
      c.stop_tol = parse_number<double>(e, key);
    } else if (key == "reference_tol") {
      c.reference_tol = parse_number<double>(e, key);
    } else if (key == "certificate_tol") {
      c.certificate.tol = parse_number<double>(e, key);
    } else if (key == "primal_zero_tol") {
      c.tolerances.primal_zero_tol = parse_number<double>(e, key);
    } else if (key == "dual_saturation_tol") {
      c.tolerances.dual_saturation_tol = parse_number<double>(e, key);
    } else if (key == "injectivity_threshold") {
      c.injectivity_threshold = parse_number<double>(e, key);
    } else if (key == "lambda_rule") {
      c.lambda_rule = pick<LambdaRule>(
          e, key, {{"fixed", LambdaRule::kFixed}, {"proportional", LambdaRule::kProportional}});
    } else if (key == "solver") {
      c.solver = pick<SolverChoice>(
          e, key, {{"fb", SolverChoice::kForwardBackward}, {"dr", SolverChoice::kDouglasRachford}});
    } else if (key == "phi_scaling") {
      c.phi_scaling = pick<PhiScaling>(
          e, key, {{"unit", PhiScaling::kUnit}, {"normalized", PhiScaling::kNormalized}});
    } else if (key == "r0_grid") {
      c.r0_grid = parse_int_array(e, key);
    } else if (key == "delta_grid") {
      c.delta_grid = parse_int_array(e, key);
    } else {
      fail(e.line, "unknown key '" + key + "'");
    }
  }
  if (c.family == RegularizerFamily::kNuclear && !unknowns_given) c.unknowns = c.side * c.side;
  c.certificate.tolerances = c.tolerances;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_text(const ExperimentConfig& c) {
  std::string s;
  auto line = [&](const std::string& key, const std::string& value) { s += key + " = " + value + "\n"; };
  auto quoted = [](const std::string& v) { return "\"" + v + "\""; };
  line("regularizer", quoted(family_name(c.family)));
  line("N", std::to_string(c.unknowns));
  line("P", std::to_string(c.measurements));
  line("block_size", std::to_string(c.block_size));
  line("side", std::to_string(c.side));
  line("r0_target", std::to_string(c.r0_target));
  line("trials", std::to_string(c.trials));
  line("path_iters", std::to_string(c.path_iters));
  line("reference_max_iters", std::to_string(c.reference_max_iters));
  line("certificate_max_iters", std::to_string(c.certificate.max_iters));
  line("master_seed", std::to_string(c.master_seed));
  line("noise_std", real(c.noise_std));
  line("lambda", real(c.lambda));
  line("c0", real(c.c0));
  line("lambda_floor", real(c.lambda_floor));
  line("gamma_factor", real(c.gamma_factor));
  line("tau", real(c.tau));
  line("stop_tol", real(c.stop_tol));
  line("reference_tol", real(c.reference_tol));
  line("certificate_tol", real(c.certificate.tol));
  line("primal_zero_tol", real(c.tolerances.primal_zero_tol));
  line("dual_saturation_tol", real(c.tolerances.dual_saturation_tol));
  line("injectivity_threshold", real(c.injectivity_threshold));
  line("lambda_rule", quoted(c.lambda_rule == LambdaRule::kFixed ? "fixed" : "proportional"));
  line("solver", quoted(solver_name(c.solver)));
  line("phi_scaling", quoted(c.phi_scaling == PhiScaling::kUnit ? "unit" : "normalized"));
  line("r0_grid", int_array(c.r0_grid));
  line("delta_grid", int_array(c.delta_grid));
  return s;
}

}  // namespace mirrorstrat
