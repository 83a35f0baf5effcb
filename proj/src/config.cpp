#include "ctlo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace ctlo {

namespace {

struct ConfigState {
  double fov_hor = 80.0;  // degrees
  double fov_ver = 80.0;
  double beta_res = 10.0;
  OdometryConfig cfg;
};

void apply_key(ConfigState& st, const std::string& key, const std::string& value,
               const std::string& where) {
  auto num = [&]() {
    try {
      std::size_t pos;
      const double d = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad numeric value for key '" + key + "': " + value);
    }
  };
  RegistrationConfig& reg = st.cfg.registration;
  if (key == "sigma") reg.sigma = num();
  else if (key == "w") reg.outlier_weight = num();
  else if (key == "window") reg.window = static_cast<int>(num());
  else if (key == "lambda_loc") reg.lambda_loc = num();
  else if (key == "lambda_vel") reg.lambda_vel = num();
  else if (key == "delta_sigma") reg.delta_sigma = num();
  else if (key == "max_em_iters") reg.max_em_iters = static_cast<int>(num());
  else if (key == "convergence_eps") reg.convergence_eps = num();
  else if (key == "beta_res") st.beta_res = num();
  else if (key == "fov_hor") st.fov_hor = num();
  else if (key == "fov_ver") st.fov_ver = num();
  else if (key == "scan_window") st.cfg.scan_window = num();
  else if (key == "r_min") st.cfg.r_min = num();
  else if (key == "r_max") st.cfg.r_max = num();
  else if (key == "normal_patch") st.cfg.normal_patch = static_cast<int>(num());
  else if (key == "normal_min_neighbors") st.cfg.normal_min_neighbors = static_cast<int>(num());
  else throw ConfigError(where + ": unknown config key '" + key + "'");
}

void validate(const OdometryConfig& cfg) {
  const RegistrationConfig& reg = cfg.registration;
  if (reg.sigma <= 0) throw ConfigError("sigma must be > 0");
  if (reg.outlier_weight <= 0 || reg.outlier_weight >= 1) {
    throw ConfigError("w must be in (0, 1)");
  }
  if (reg.window < 3 || reg.window % 2 == 0) throw ConfigError("window must be odd and >= 3");
  if (cfg.r_min >= cfg.r_max) throw ConfigError("r_min must be < r_max");
  if (cfg.scan_window <= 0) throw ConfigError("scan_window must be > 0");
  if (cfg.projection.fov_hor <= 0 || cfg.projection.fov_hor > 2 * M_PI ||
      cfg.projection.fov_ver <= 0 || cfg.projection.fov_ver > 2 * M_PI) {
    throw ConfigError("fov must be in (0, 360] degrees");
  }
}

const char* kKeys[] = {"sigma",        "w",           "window",       "lambda_loc",
                       "lambda_vel",   "delta_sigma", "max_em_iters", "convergence_eps",
                       "beta_res",     "fov_hor",     "fov_ver",      "scan_window",
                       "r_min",        "r_max",       "normal_patch", "normal_min_neighbors"};

void apply_env_overrides(ConfigState& st) {
  for (const char* key : kKeys) {
    std::string env = "CTLO_";
    for (const char* c = key; *c; ++c) env += static_cast<char>(std::toupper(*c));
    if (const char* value = std::getenv(env.c_str())) {
      apply_key(st, key, value, "env " + env);
    }
  }
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

OdometryConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ConfigState st;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    apply_key(st, trim(line.substr(0, eq)), trim(line.substr(eq + 1)),
              path + ":" + std::to_string(lineno));
  }
  apply_env_overrides(st);
  st.cfg.projection = ProjectionParams::FromDegrees(st.fov_hor, st.fov_ver, st.beta_res);
  validate(st.cfg);
  return st.cfg;
}

OdometryConfig default_config() {
  ConfigState st;
  apply_env_overrides(st);
  st.cfg.projection = ProjectionParams::FromDegrees(st.fov_hor, st.fov_ver, st.beta_res);
  validate(st.cfg);
  return st.cfg;
}

}  // namespace ctlo
