#include "framecast/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "framecast/rng.hpp"

namespace framecast {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid config: " + what);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ScenarioConfig::validate() const {
  require(n_users >= 1, "n_users must be >= 1");
  require(n_vr >= 0 && n_vr <= n_users, "0 <= n_vr <= n_users");
  require(frames_per_second >= 1, "frames_per_second must be >= 1");
  require(min_fps_vr <= frames_per_second, "min_fps_vr <= frames_per_second");
  require(min_fps_non <= frames_per_second, "min_fps_non <= frames_per_second");
  require(min_fps_vr >= 0 && min_fps_non >= 0, "frame-rate floors must be >= 0");
  require(resolution_pixels > 0, "resolution_pixels must be > 0");
  require(bits_per_pixel > 0, "bits_per_pixel must be > 0");
  require(compression_min > 0, "compression_min must be > 0");
  require(compression_min <= compression_max, "compression_min <= compression_max");
  require(bandwidth_per_user > 0, "bandwidth_per_user must be > 0");
  require(noise_psd > 0, "noise_psd must be > 0");
  require(p_max > 0, "p_max must be > 0");
  require(distance_min > 0 && distance_min <= distance_max,
          "0 < distance_min <= distance_max");
  require(reference_gain > 0, "reference_gain must be > 0");
  require(gain_log_scale > 0, "gain_log_scale must be > 0");
  require(std_scale > 0, "std_scale must be > 0");
}

std::vector<UserProfile> build_scenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(substream_seed(config.seed, "scenario"));
  std::vector<UserProfile> users(config.n_users);
  const int n_non = config.n_non();
  for (int n = 0; n < config.n_users; ++n) {
    UserProfile& u = users[n];
    u.index = n;
    u.mode = n < n_non ? 0 : 1;
    u.distance = rng.uniform(config.distance_min, config.distance_max);
    u.large_scale_gain =
        config.reference_gain * std::pow(u.distance, -config.path_loss_exponent);
  }
  return users;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid config: key '" + key +
                                "' has non-numeric value '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  double d = to_double(key, value);
  int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) {
    throw std::invalid_argument("invalid config: key '" + key +
                                "' must be an integer, got '" + value + "'");
  }
  return i;
}

}  // namespace

ScenarioConfig scenario_from_kv(const std::map<std::string, std::string>& kv,
                                const std::vector<std::string>& extra_allowed) {
  ScenarioConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "n_users") c.n_users = to_int(key, value);
    else if (key == "n_vr") c.n_vr = to_int(key, value);
    else if (key == "frames_per_second") c.frames_per_second = to_int(key, value);
    else if (key == "resolution_pixels") c.resolution_pixels = to_double(key, value);
    else if (key == "bits_per_pixel") c.bits_per_pixel = to_double(key, value);
    else if (key == "compression_min") c.compression_min = to_double(key, value);
    else if (key == "compression_max") c.compression_max = to_double(key, value);
    else if (key == "bandwidth_per_user") c.bandwidth_per_user = to_double(key, value);
    else if (key == "noise_psd") c.noise_psd = to_double(key, value);
    else if (key == "p_max") c.p_max = to_double(key, value);
    else if (key == "min_fps_vr") c.min_fps_vr = to_int(key, value);
    else if (key == "min_fps_non") c.min_fps_non = to_int(key, value);
    else if (key == "w_frame") c.w_frame = to_double(key, value);
    else if (key == "w_sickness") c.w_sickness = to_double(key, value);
    else if (key == "path_loss_exponent") c.path_loss_exponent = to_double(key, value);
    else if (key == "distance_min") c.distance_min = to_double(key, value);
    else if (key == "distance_max") c.distance_max = to_double(key, value);
    else if (key == "reference_gain") c.reference_gain = to_double(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_double(key, value));
    else if (key == "gain_log_offset") c.gain_log_offset = to_double(key, value);
    else if (key == "gain_log_scale") c.gain_log_scale = to_double(key, value);
    else if (key == "std_scale") c.std_scale = to_double(key, value);
    else if (std::find(extra_allowed.begin(), extra_allowed.end(), key) ==
             extra_allowed.end()) {
      throw std::invalid_argument("invalid config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  return scenario_from_kv(parse_kv_file(path));
}

void save_scenario_config(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "n_users = " << config.n_users << "\n"
      << "n_vr = " << config.n_vr << "\n"
      << "frames_per_second = " << config.frames_per_second << "\n"
      << "resolution_pixels = " << num(config.resolution_pixels) << "\n"
      << "bits_per_pixel = " << num(config.bits_per_pixel) << "\n"
      << "compression_min = " << num(config.compression_min) << "\n"
      << "compression_max = " << num(config.compression_max) << "\n"
      << "bandwidth_per_user = " << num(config.bandwidth_per_user) << "\n"
      << "noise_psd = " << num(config.noise_psd) << "\n"
      << "p_max = " << num(config.p_max) << "\n"
      << "min_fps_vr = " << config.min_fps_vr << "\n"
      << "min_fps_non = " << config.min_fps_non << "\n"
      << "w_frame = " << num(config.w_frame) << "\n"
      << "w_sickness = " << num(config.w_sickness) << "\n"
      << "path_loss_exponent = " << num(config.path_loss_exponent) << "\n"
      << "distance_min = " << num(config.distance_min) << "\n"
      << "distance_max = " << num(config.distance_max) << "\n"
      << "reference_gain = " << num(config.reference_gain) << "\n"
      << "seed = " << config.seed << "\n"
      << "gain_log_offset = " << num(config.gain_log_offset) << "\n"
      << "gain_log_scale = " << num(config.gain_log_scale) << "\n"
      << "std_scale = " << num(config.std_scale) << "\n";
}

}  // namespace framecast
