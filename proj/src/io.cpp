#include "bhd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string_view>
#include <system_error>

#include <json.hpp>

#include "bhd/errors.hpp"

namespace bhd {

namespace {

using nlohmann::json;

[[noreturn]] void fail_config(const std::string& msg) { throw ConfigError("config: " + msg); }

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail_config("unknown key \"" + join_path(path, it.key()) + "\"");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& path, const char* key, double def) {
  const json* v = find(obj, key);
  if (v == nullptr) return def;
  if (!v->is_number()) fail_config(join_path(path, key) + " must be a number");
  return v->get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key,
                         std::int64_t def) {
  const json* v = find(obj, key);
  if (v == nullptr) return def;
  if (v->is_number_integer() || v->is_number_unsigned()) return v->get<std::int64_t>();
  if (v->is_number_float()) {
    const double d = v->get<double>();
    if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  fail_config(join_path(path, key) + " must be an integer");
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
  const json* v = find(obj, key);
  if (v == nullptr) return def;
  if (!v->is_boolean()) fail_config(join_path(path, key) + " must be a boolean");
  return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& def) {
  const json* v = find(obj, key);
  if (v == nullptr) return def;
  if (!v->is_string()) fail_config(join_path(path, key) + " must be a string");
  return v->get<std::string>();
}

std::vector<double> get_number_array(const json& arr, const std::string& path) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) fail_config(path + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

GaussianState parse_state(const json& j) {
  const json* s = find(j, "state");
  if (s == nullptr) return GaussianState::vacuum();
  if (!s->is_object()) fail_config("state must be an object");
  check_keys(*s, "state", {"vx", "vy", "cxy"});
  const double vx = get_number(*s, "state", "vx", kVacuumVariance);
  const double vy = get_number(*s, "state", "vy", kVacuumVariance);
  const double cxy = get_number(*s, "state", "cxy", 0.0);
  if (!(vx > 0.0)) fail_config("state.vx must be positive (got " + format_double(vx) + ")");
  if (!(vy > 0.0)) fail_config("state.vy must be positive (got " + format_double(vy) + ")");
  try {
    return GaussianState(vx, vy, cxy);
  } catch (const std::domain_error& e) {
    fail_config(std::string("state: ") + e.what());
  }
}

LocalOscillator parse_lo(const json& j) {
  const json* s = find(j, "lo");
  if (s == nullptr) return LocalOscillator();
  if (!s->is_object()) fail_config("lo must be an object");
  check_keys(*s, "lo", {"amplitude", "vx"});
  const double amplitude = get_number(*s, "lo", "amplitude", 1.0);
  const double vx = get_number(*s, "lo", "vx", kVacuumVariance);
  if (!(amplitude >= 0.0)) {
    fail_config("lo.amplitude must be nonnegative (got " + format_double(amplitude) + ")");
  }
  if (!(vx > 0.0)) fail_config("lo.vx must be positive (got " + format_double(vx) + ")");
  return LocalOscillator(amplitude, vx);
}

MeasurementSetting parse_setting(const json& j) {
  const json* s = find(j, "setting");
  if (s == nullptr) return MeasurementSetting();
  if (!s->is_object()) fail_config("setting must be an object");
  check_keys(*s, "setting", {"phase", "transmission"});
  const double phase = get_number(*s, "setting", "phase", 0.0);
  const double transmission = get_number(*s, "setting", "transmission", 1.0);
  if (!(transmission > 0.0) || !(transmission <= 1.0)) {
    fail_config("setting.transmission must be in (0, 1] (got " + format_double(transmission) +
                ")");
  }
  return MeasurementSetting(phase, transmission);
}

DetectorNoiseModel parse_noise(const json& j) {
  const json* s = find(j, "noise");
  if (s == nullptr) return DetectorNoiseModel();
  if (!s->is_object()) fail_config("noise must be an object");
  check_keys(*s, "noise", {"sigma1", "sigma2", "rho"});
  const double sigma1 = get_number(*s, "noise", "sigma1", 0.0);
  const double sigma2 = get_number(*s, "noise", "sigma2", 0.0);
  const double rho = get_number(*s, "noise", "rho", 0.0);
  if (!(sigma1 >= 0.0)) fail_config("noise.sigma1 must be nonnegative");
  if (!(sigma2 >= 0.0)) fail_config("noise.sigma2 must be nonnegative");
  if (!(std::abs(rho) <= 1.0)) {
    fail_config("noise.rho must be in [-1, 1] (got " + format_double(rho) + ")");
  }
  return DetectorNoiseModel(sigma1, sigma2, rho);
}

std::vector<double> parse_phases(const json& j) {
  const json* p = find(j, "phases");
  if (p == nullptr) return phase_grid(64);
  if (p->is_array()) {
    auto phases = get_number_array(*p, "phases");
    if (phases.empty()) fail_config("phases must not be empty");
    for (std::size_t i = 0; i < phases.size(); ++i) {
      if (!(phases[i] >= 0.0) || !(phases[i] < 2.0 * std::numbers::pi)) {
        fail_config("phases must lie in [0, 2*pi)");
      }
      if (i > 0 && !(phases[i] > phases[i - 1])) {
        fail_config("phases must be strictly increasing");
      }
    }
    return phases;
  }
  if (p->is_object()) {
    check_keys(*p, "phases", {"count"});
    const std::int64_t count = get_integer(*p, "phases", "count", 64);
    if (count < 1) fail_config("phases.count must be >= 1");
    return phase_grid(static_cast<std::size_t>(count));
  }
  fail_config("phases must be an array of numbers or an object {\"count\": N}");
}

std::vector<double> parse_transmissions(const json& j) {
  const json* p = find(j, "transmissions");
  if (p == nullptr) return transmission_grid(20, 0.02, 1.0);
  if (p->is_array()) {
    auto ts = get_number_array(*p, "transmissions");
    if (ts.empty()) fail_config("transmissions must not be empty");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!(ts[i] > 0.0) || !(ts[i] <= 1.0)) {
        fail_config("transmissions must lie in (0, 1]");
      }
      if (i > 0 && !(ts[i] > ts[i - 1])) {
        fail_config("transmissions must be strictly increasing");
      }
    }
    return ts;
  }
  if (p->is_object()) {
    check_keys(*p, "transmissions", {"count", "min", "max"});
    const std::int64_t count = get_integer(*p, "transmissions", "count", 20);
    const double min = get_number(*p, "transmissions", "min", 0.02);
    const double max = get_number(*p, "transmissions", "max", 1.0);
    if (count < 2) fail_config("transmissions.count must be >= 2");
    if (!(min > 0.0) || !(max <= 1.0) || !(min < max)) {
      fail_config("transmissions grid needs 0 < min < max <= 1");
    }
    return transmission_grid(static_cast<std::size_t>(count), min, max);
  }
  fail_config("transmissions must be an array or an object {count, min, max}");
}

std::vector<double> parse_en_scales(const json& j) {
  const json* p = find(j, "en_scales");
  if (p == nullptr) return {0.0, 1.0, 10.0};
  if (!p->is_array()) fail_config("en_scales must be an array of numbers");
  auto scales = get_number_array(*p, "en_scales");
  if (scales.empty()) fail_config("en_scales must not be empty");
  for (const double s : scales) {
    if (!(s >= 0.0)) fail_config("en_scales must be nonnegative");
  }
  return scales;
}

}  // namespace

RunConfig parse_run_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_config(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail_config("top level must be a JSON object");
  check_keys(j, "",
             {"state", "lo", "setting", "noise", "n_samples", "seed", "ac_coupled", "experiment",
              "phases", "transmissions", "en_scales", "en_rho", "snl_mode", "out"});

  RunConfig cfg;
  cfg.sim.state = parse_state(j);
  cfg.sim.lo = parse_lo(j);
  cfg.sim.setting = parse_setting(j);
  cfg.sim.noise = parse_noise(j);

  const std::int64_t n_samples = get_integer(j, "", "n_samples", 1'000'000);
  if (n_samples < 2) {
    fail_config("n_samples must be >= 2 (got " + std::to_string(n_samples) + ")");
  }
  cfg.sim.n_samples = n_samples;

  const json* seed = find(j, "seed");
  if (seed != nullptr) {
    if (seed->is_number_unsigned()) {
      cfg.sim.seed = seed->get<std::uint64_t>();
    } else if (seed->is_number_integer() && seed->get<std::int64_t>() >= 0) {
      cfg.sim.seed = static_cast<std::uint64_t>(seed->get<std::int64_t>());
    } else {
      fail_config("seed must be a nonnegative integer");
    }
  }

  cfg.sim.ac_coupled = get_bool(j, "", "ac_coupled", true);

  cfg.experiment = get_string(j, "", "experiment", "");
  if (!cfg.experiment.empty() && cfg.experiment != "simulate" && cfg.experiment != "phase-scan" &&
      cfg.experiment != "atten-sweep" && cfg.experiment != "en-robustness") {
    fail_config("experiment must be one of simulate, phase-scan, atten-sweep, en-robustness "
                "(got \"" +
                cfg.experiment + "\")");
  }

  cfg.phases = parse_phases(j);
  cfg.transmissions = parse_transmissions(j);
  cfg.en_scales = parse_en_scales(j);

  cfg.en_rho = get_number(j, "", "en_rho", cfg.sim.noise.rho);
  if (!(std::abs(cfg.en_rho) <= 1.0)) {
    fail_config("en_rho must be in [-1, 1] (got " + format_double(cfg.en_rho) + ")");
  }

  const std::string mode = get_string(j, "", "snl_mode", "analytic");
  if (mode == "analytic") {
    cfg.snl_mode = SnlMode::Analytic;
  } else if (mode == "calibrated") {
    cfg.snl_mode = SnlMode::Calibrated;
  } else {
    fail_config("snl_mode must be \"analytic\" or \"calibrated\" (got \"" + mode + "\")");
  }

  cfg.out = get_string(j, "", "out", "");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config_json(buf.str());
}

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

bool parse_double_field(std::string_view field, double& out) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

bool parse_pair_line(const std::string& line, double& a, double& b) {
  const std::size_t comma = line.find(',');
  if (comma == std::string::npos) return false;
  if (line.find(',', comma + 1) != std::string::npos) return false;
  return parse_double_field(std::string_view(line).substr(0, comma), a) &&
         parse_double_field(std::string_view(line).substr(comma + 1), b);
}

void append_meta(std::string& out, const char* key, const std::string& value) {
  out += "# ";
  out += key;
  out += '=';
  out += value;
  out += '\n';
}

std::optional<double> meta_double(const std::map<std::string, std::string>& meta,
                                  const char* key) {
  auto it = meta.find(key);
  if (it == meta.end()) return std::nullopt;
  double v = 0.0;
  if (!parse_double_field(it->second, v)) return std::nullopt;
  return v;
}

std::optional<SimulationConfig> config_from_meta(const std::map<std::string, std::string>& meta) {
  const auto vx = meta_double(meta, "vx");
  const auto vy = meta_double(meta, "vy");
  const auto cxy = meta_double(meta, "cxy");
  const auto amp = meta_double(meta, "lo_amplitude");
  const auto lo_vx = meta_double(meta, "lo_vx");
  const auto phase = meta_double(meta, "phase");
  const auto trans = meta_double(meta, "transmission");
  const auto s1 = meta_double(meta, "sigma1");
  const auto s2 = meta_double(meta, "sigma2");
  const auto rho = meta_double(meta, "rho");
  const auto n = meta_double(meta, "n_samples");
  const auto ac = meta_double(meta, "ac_coupled");
  auto seed_it = meta.find("seed");
  if (!vx || !vy || !cxy || !amp || !lo_vx || !phase || !trans || !s1 || !s2 || !rho || !n ||
      !ac || seed_it == meta.end()) {
    return std::nullopt;
  }
  std::uint64_t seed = 0;
  const std::string& s = seed_it->second;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  try {
    SimulationConfig cfg;
    cfg.state = GaussianState(*vx, *vy, *cxy);
    cfg.lo = LocalOscillator(*amp, *lo_vx);
    cfg.setting = MeasurementSetting(*phase, *trans);
    cfg.noise = DetectorNoiseModel(*s1, *s2, *rho);
    cfg.n_samples = static_cast<std::int64_t>(*n);
    cfg.seed = seed;
    cfg.ac_coupled = *ac != 0.0;
    cfg.validate();
    return cfg;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const TracePair& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());

  std::string head;
  if (!traces.metadata.source.empty()) append_meta(head, "source", traces.metadata.source);
  if (traces.metadata.config) {
    const SimulationConfig& c = *traces.metadata.config;
    append_meta(head, "vx", format_double(c.state.vx));
    append_meta(head, "vy", format_double(c.state.vy));
    append_meta(head, "cxy", format_double(c.state.cxy));
    append_meta(head, "lo_amplitude", format_double(c.lo.amplitude));
    append_meta(head, "lo_vx", format_double(c.lo.vx));
    append_meta(head, "phase", format_double(c.setting.phase));
    append_meta(head, "transmission", format_double(c.setting.transmission));
    append_meta(head, "sigma1", format_double(c.noise.sigma1));
    append_meta(head, "sigma2", format_double(c.noise.sigma2));
    append_meta(head, "rho", format_double(c.noise.rho));
    append_meta(head, "n_samples", std::to_string(c.n_samples));
    append_meta(head, "seed", std::to_string(c.seed));
    append_meta(head, "ac_coupled", c.ac_coupled ? "1" : "0");
  }
  if (traces.metadata.lo_power) {
    append_meta(head, "lo_power", format_double(*traces.metadata.lo_power));
  }
  head += "i1,i2\n";
  out << head;

  char line[96];
  for (std::size_t k = 0; k < traces.ch1.size(); ++k) {
    auto r1 = std::to_chars(line, line + 40, traces.ch1[k]);
    *r1.ptr = ',';
    auto r2 = std::to_chars(r1.ptr + 1, r1.ptr + 41, traces.ch2[k]);
    *r2.ptr = '\n';
    out.write(line, r2.ptr + 1 - line);
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TracePair read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file: " + path.string());

  TracePair traces;
  std::map<std::string, std::string> meta;
  std::string line;
  std::size_t lineno = 0;
  bool header_possible = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        std::string key = body.substr(0, eq);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        while (!key.empty() && key.back() == ' ') key.pop_back();
        meta[key] = body.substr(eq + 1);
      }
      continue;
    }
    if (header_possible && line == "i1,i2") {
      header_possible = false;
      continue;
    }
    header_possible = false;
    double a = 0.0;
    double b = 0.0;
    if (!parse_pair_line(line, a, b)) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                        ": expected two numeric fields");
    }
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                        ": non-finite sample");
    }
    traces.ch1.push_back(a);
    traces.ch2.push_back(b);
  }
  if (traces.ch1.size() < 2) {
    throw ConfigError(path.string() + ": trace must contain at least 2 samples");
  }

  traces.metadata.config = config_from_meta(meta);
  traces.metadata.lo_power = meta_double(meta, "lo_power");
  auto src = meta.find("source");
  traces.metadata.source = src != meta.end() ? src->second : "file:" + path.filename().string();
  return traces;
}

std::vector<std::pair<double, double>> read_ladder_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ladder file: " + path.string());

  std::vector<std::pair<double, double>> points;
  std::string line;
  std::size_t lineno = 0;
  bool header_possible = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    if (header_possible && line == "power,variance") {
      header_possible = false;
      continue;
    }
    header_possible = false;
    double p = 0.0;
    double v = 0.0;
    if (!parse_pair_line(line, p, v)) {
      throw ConfigError(path.string() + ": line " + std::to_string(lineno) +
                        ": expected two numeric fields");
    }
    points.emplace_back(p, v);
  }
  return points;
}

namespace {

std::string bool_cell(bool b) { return b ? "1" : "0"; }

}  // namespace

std::string to_csv(const PhaseScanResult& result) {
  std::string out = "phase,cov_mc,cov_mc_se,cov_analytic,abs_dev,within_4se,failed\n";
  for (const auto& row : result.rows) {
    out += format_double(row.phase);
    out += ',';
    if (row.failed) {
      out += "nan,nan,nan,nan,0,1\n";
      continue;
    }
    out += format_double(row.cov_mc.value);
    out += ',';
    out += format_double(row.cov_mc.std_error);
    out += ',';
    out += format_double(row.cov_analytic);
    out += ',';
    out += format_double(row.abs_dev);
    out += ',';
    out += bool_cell(row.within_4se);
    out += ",0\n";
  }
  return out;
}

std::string to_csv(const AttenuationSweepResult& result) {
  std::string out =
      "transmission,snl,sq_subtraction_db,sq_subtraction_se_db,sq_subtraction_model_db,"
      "sq_covariance_db,sq_covariance_se_db,sq_ideal_db,sub_within_4se,cov_within_4se,failed\n";
  for (const auto& row : result.rows) {
    out += format_double(row.transmission);
    out += ',';
    if (row.failed) {
      out += "nan,nan,nan,nan,nan,nan,nan,0,0,1\n";
      continue;
    }
    out += format_double(row.snl);
    out += ',';
    out += format_double(row.sq_subtraction_db);
    out += ',';
    out += format_double(row.sq_subtraction_se_db);
    out += ',';
    out += format_double(row.sq_subtraction_model_db);
    out += ',';
    if (row.cov_out_of_range) {
      out += kOutOfRangeMarker;
      out += ',';
      out += kOutOfRangeMarker;
    } else {
      out += format_double(row.sq_covariance_db);
      out += ',';
      out += format_double(row.sq_covariance_se_db);
    }
    out += ',';
    out += format_double(row.sq_ideal_db);
    out += ',';
    out += bool_cell(row.sub_within_4se);
    out += ',';
    out += bool_cell(row.cov_within_4se);
    out += ",0\n";
  }
  return out;
}

std::string to_csv(const EnRobustnessResult& result) {
  std::string out =
      "en_scale,sigma1,sigma2,covariance,covariance_se,cov_model,cov_bias,expected_bias,"
      "cov_within_4se,diff_variance,diff_variance_se,diff_model,diff_within_4se,failed\n";
  for (const auto& row : result.rows) {
    out += format_double(row.en_scale);
    out += ',';
    if (row.failed) {
      out += "nan,nan,nan,nan,nan,nan,nan,0,nan,nan,nan,0,1\n";
      continue;
    }
    out += format_double(row.sigma1);
    out += ',';
    out += format_double(row.sigma2);
    out += ',';
    out += format_double(row.cov.value);
    out += ',';
    out += format_double(row.cov.std_error);
    out += ',';
    out += format_double(row.cov_model);
    out += ',';
    out += format_double(row.cov_bias);
    out += ',';
    out += format_double(row.expected_bias);
    out += ',';
    out += bool_cell(row.cov_within_4se);
    out += ',';
    out += format_double(row.diff_var.value);
    out += ',';
    out += format_double(row.diff_var.std_error);
    out += ',';
    out += format_double(row.diff_model);
    out += ',';
    out += bool_cell(row.diff_within_4se);
    out += ",0\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

void write_calibration_json(const std::filesystem::path& path, const SnlCalibration& cal) {
  json j;
  j["slope"] = cal.slope;
  j["intercept"] = cal.intercept;
  j["r_squared"] = cal.r_squared;
  json points = json::array();
  for (const auto& [p, v] : cal.fit_points) {
    points.push_back(json::array({p, v}));
  }
  j["fit_points"] = points;
  write_text_file(path, j.dump(2) + "\n");
}

SnlCalibration read_calibration_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open calibration file: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "slope" && it.key() != "intercept" && it.key() != "r_squared" &&
        it.key() != "fit_points") {
      throw ConfigError(path.string() + ": unknown key \"" + it.key() + "\"");
    }
  }

  SnlCalibration cal;
  const json* slope = find(j, "slope");
  if (slope == nullptr || !slope->is_number()) {
    throw ConfigError(path.string() + ": slope must be a number");
  }
  cal.slope = slope->get<double>();
  if (!(cal.slope > 0.0)) {
    throw ConfigError(path.string() + ": slope must be positive");
  }
  const json* intercept = find(j, "intercept");
  if (intercept != nullptr) {
    if (!intercept->is_number()) throw ConfigError(path.string() + ": intercept must be a number");
    cal.intercept = intercept->get<double>();
  }
  const json* r2 = find(j, "r_squared");
  if (r2 != nullptr) {
    if (!r2->is_number()) throw ConfigError(path.string() + ": r_squared must be a number");
    cal.r_squared = r2->get<double>();
  }
  const json* points = find(j, "fit_points");
  if (points != nullptr) {
    if (!points->is_array()) throw ConfigError(path.string() + ": fit_points must be an array");
    for (const auto& p : *points) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw ConfigError(path.string() + ": fit_points entries must be [power, variance] pairs");
      }
      cal.fit_points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
  }
  return cal;
}

}  // namespace bhd
