#include "gbpn_cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "gbpn/error.hpp"

namespace gbpn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ParameterError("config key '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ParameterError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

SolverConfig RunConfig::solver(int threads) const {
  SolverConfig c;
  c.iterations = iterations;
  c.nonlocal_steps = nonlocal_steps;
  c.epsilon_cavity = epsilon_cavity;
  c.early_stop_tol = early_stop_tol;
  c.record_trace = record_trace;
  c.threads = threads;
  return c;
}

PotentialOptions RunConfig::potentials() const {
  return {w_meas, lambda_smooth, sigma_color, w_min, beta_const};
}

NonlocalOptions RunConfig::nonlocal() const {
  return {k_nonlocal, search_radius, patch_radius, min_distance};
}

void RunConfig::validate() const {
  solver(1).validate();
  if (!(w_meas > 0) || !(lambda_smooth > 0) || !(sigma_color > 0) || !(w_min > 0)) {
    throw ParameterError("w_meas, lambda_smooth, sigma_color and w_min must be positive");
  }
  if (!(beta_const >= 0 && beta_const < 1)) throw ParameterError("beta_const must lie in [0, 1)");
  if (k_nonlocal < 0) throw ParameterError("k_nonlocal must be >= 0");
  if (min_distance < 2) throw ParameterError("min_distance must be >= 2");
  if (search_radius < min_distance) throw ParameterError("search_radius must be >= min_distance");
  if (patch_radius < 0) throw ParameterError("patch_radius must be >= 0");
  if (!(depth_scale > 0)) throw ParameterError("depth_scale must be positive");
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw_value);

  if (key == "iterations") iterations = parse_number<int>(key, value);
  else if (key == "nonlocal_steps") nonlocal_steps = parse_number<int>(key, value);
  else if (key == "epsilon_cavity") epsilon_cavity = parse_number<double>(key, value);
  else if (key == "early_stop_tol") {
    if (value.empty() || value == "none") early_stop_tol.reset();
    else early_stop_tol = parse_number<double>(key, value);
  }
  else if (key == "record_trace") record_trace = parse_bool(key, value);
  else if (key == "w_meas") w_meas = parse_number<double>(key, value);
  else if (key == "lambda_smooth") lambda_smooth = parse_number<double>(key, value);
  else if (key == "sigma_color") sigma_color = parse_number<double>(key, value);
  else if (key == "w_min") w_min = parse_number<double>(key, value);
  else if (key == "beta_const") beta_const = parse_number<double>(key, value);
  else if (key == "connectivity") {
    if (value == "4" || value == "four") connectivity = Connectivity::Four;
    else if (value == "8" || value == "eight") connectivity = Connectivity::Eight;
    else throw ParameterError("connectivity must be 4 or 8, got '" + value + "'");
  }
  else if (key == "k_nonlocal") k_nonlocal = parse_number<int>(key, value);
  else if (key == "search_radius") search_radius = parse_number<int>(key, value);
  else if (key == "patch_radius") patch_radius = parse_number<int>(key, value);
  else if (key == "min_distance") min_distance = parse_number<int>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "depth_scale") depth_scale = parse_number<double>(key, value);
  else throw ParameterError("unknown config key '" + raw_key + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "iterations=" << iterations << '\n'
     << "nonlocal_steps=" << nonlocal_steps << '\n'
     << "epsilon_cavity=" << format_double(epsilon_cavity) << '\n'
     << "early_stop_tol=" << (early_stop_tol ? format_double(*early_stop_tol) : "none") << '\n'
     << "record_trace=" << (record_trace ? "true" : "false") << '\n'
     << "w_meas=" << format_double(w_meas) << '\n'
     << "lambda_smooth=" << format_double(lambda_smooth) << '\n'
     << "sigma_color=" << format_double(sigma_color) << '\n'
     << "w_min=" << format_double(w_min) << '\n'
     << "beta_const=" << format_double(beta_const) << '\n'
     << "connectivity=" << to_string(connectivity) << '\n'
     << "k_nonlocal=" << k_nonlocal << '\n'
     << "search_radius=" << search_radius << '\n'
     << "patch_radius=" << patch_radius << '\n'
     << "min_distance=" << min_distance << '\n'
     << "seed=" << seed << '\n'
     << "depth_scale=" << format_double(depth_scale) << '\n';
  return os.str();
}

RunConfig parse_config_text(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    base.set(t.substr(0, eq), t.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config_text(buffer.str(), std::move(base));
}

int threads_from_env() {
  const int hw = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("GBPN_THREADS")) {
    int v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v >= 1) return v;
  }
  return hw;
}

}  // namespace gbpn::cli
