#include "eogv/config.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eogv {

using json = nlohmann::ordered_json;

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["sample_rate"] = c.sample_rate;
  j["filter"] = {{"lowpass_order", c.filter.lowpass_order},
                 {"lowpass_cutoff_hz", c.filter.lowpass_cutoff_hz},
                 {"notch_hz", c.filter.notch_hz},
                 {"notch_q", c.filter.notch_q},
                 {"savgol_window", c.filter.savgol_window},
                 {"savgol_order", c.filter.savgol_order}};
  j["window"] = {{"length_s", c.window.length_s}, {"step_s", c.window.step_s}};
  j["gate"] = {{"baseline_s", c.gate.baseline_s},
               {"mad_multiplier", c.gate.mad_multiplier},
               {"mad_floor_mv", c.gate.mad_floor_mv}};
  j["artifact_features"] = {{"band_lo_hz", c.artifact_features.band_lo_hz},
                            {"band_hi_hz", c.artifact_features.band_hi_hz},
                            {"wavelet_levels", c.artifact_features.wavelet_levels}};
  j["logistic"] = {{"l2", c.logistic.l2},
                   {"max_iter", c.logistic.max_iter},
                   {"tol", c.logistic.tol},
                   {"balanced", c.logistic.balanced}};
  j["peaks"] = {{"min_amplitude_mv", c.peaks.min_amplitude_mv},
                {"min_separation_s", c.peaks.min_separation_s}};
  j["segment_half_s"] = c.segment_half_s;
  j["merge_gap_s"] = c.merge_gap_s;
  j["forest"] = {{"n_trees", c.forest.n_trees},
                 {"max_depth", c.forest.max_depth},
                 {"max_features", c.forest.max_features},
                 {"bootstrap", c.forest.bootstrap},
                 {"min_samples_split", c.forest.min_samples_split},
                 {"seed", c.forest.seed}};
  j["preamble"] = {{"threshold_mv", c.preamble.threshold_mv},
                   {"refractory_s", c.preamble.refractory_s}};
  j["eye"] = {{"ipd_mm", c.eye.ipd_mm}};
  j["depths"] = {{"near_cm", c.depths.near_cm}, {"mid_cm", c.depths.mid_cm}, {"far_cm", c.depths.far_cm}};
  j["seed"] = c.seed;
  j["min_accuracy"] = c.min_accuracy;
  j["max_false_positive_rate"] = c.max_false_positive_rate;
  return j;
}

// Reads known keys from an object and complains about anything left over.
class Fields {
public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + where_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad value for '" + where_ + key + "'");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw std::invalid_argument("config: unknown key '" + where_ + it.key() + "'");
    }
  }

private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

} // namespace

void RunConfig::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("config: sample_rate must be positive");
  filter.validate(sample_rate);
  window.validate(sample_rate);
  if (!(gate.baseline_s > 0.0) || !(gate.mad_multiplier > 0.0) || !(gate.mad_floor_mv > 0.0)) {
    throw std::invalid_argument("config: gate parameters must be positive");
  }
  if (!(artifact_features.band_lo_hz >= 0.0) || !(artifact_features.band_hi_hz > artifact_features.band_lo_hz) ||
      artifact_features.wavelet_levels < 1) {
    throw std::invalid_argument("config: invalid artifact feature band or wavelet levels");
  }
  if (!(logistic.l2 >= 0.0) || logistic.max_iter < 1 || !(logistic.tol > 0.0)) {
    throw std::invalid_argument("config: invalid logistic options");
  }
  if (!(peaks.min_amplitude_mv > 0.0) || !(peaks.min_separation_s >= 0.0)) {
    throw std::invalid_argument("config: invalid peak parameters");
  }
  if (!(segment_half_s > 0.0) || 2.0 * segment_half_s > window.length_s) {
    throw std::invalid_argument("config: segment must be positive and fit inside a window");
  }
  if (!(merge_gap_s >= 0.0)) throw std::invalid_argument("config: merge_gap_s must be non-negative");
  if (forest.n_trees < 1 || forest.max_depth < 0 || forest.max_features < 0 || forest.min_samples_split < 2) {
    throw std::invalid_argument("config: invalid forest parameters");
  }
  if (!(preamble.threshold_mv > 0.0) || !(preamble.refractory_s >= 0.0)) {
    throw std::invalid_argument("config: invalid preamble parameters");
  }
  if (!(eye.ipd_mm > 0.0)) throw std::invalid_argument("config: ipd must be positive");
  if (!(depths.near_cm > 0.0 && depths.mid_cm > 0.0 && depths.far_cm > 0.0)) {
    throw std::invalid_argument("config: depths must be positive");
  }
  if (!(min_accuracy >= 0.0 && min_accuracy <= 1.0) || !(max_false_positive_rate >= 0.0)) {
    throw std::invalid_argument("config: invalid acceptance thresholds");
  }
}

std::string config_to_json(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  RunConfig c;
  Fields top(j, "");
  top.get("sample_rate", c.sample_rate);
  if (const json* s = top.sub("filter")) {
    Fields f(*s, "filter.");
    f.get("lowpass_order", c.filter.lowpass_order);
    f.get("lowpass_cutoff_hz", c.filter.lowpass_cutoff_hz);
    f.get("notch_hz", c.filter.notch_hz);
    f.get("notch_q", c.filter.notch_q);
    f.get("savgol_window", c.filter.savgol_window);
    f.get("savgol_order", c.filter.savgol_order);
    f.finish();
  }
  if (const json* s = top.sub("window")) {
    Fields f(*s, "window.");
    f.get("length_s", c.window.length_s);
    f.get("step_s", c.window.step_s);
    f.finish();
  }
  if (const json* s = top.sub("gate")) {
    Fields f(*s, "gate.");
    f.get("baseline_s", c.gate.baseline_s);
    f.get("mad_multiplier", c.gate.mad_multiplier);
    f.get("mad_floor_mv", c.gate.mad_floor_mv);
    f.finish();
  }
  if (const json* s = top.sub("artifact_features")) {
    Fields f(*s, "artifact_features.");
    f.get("band_lo_hz", c.artifact_features.band_lo_hz);
    f.get("band_hi_hz", c.artifact_features.band_hi_hz);
    f.get("wavelet_levels", c.artifact_features.wavelet_levels);
    f.finish();
  }
  if (const json* s = top.sub("logistic")) {
    Fields f(*s, "logistic.");
    f.get("l2", c.logistic.l2);
    f.get("max_iter", c.logistic.max_iter);
    f.get("tol", c.logistic.tol);
    f.get("balanced", c.logistic.balanced);
    f.finish();
  }
  if (const json* s = top.sub("peaks")) {
    Fields f(*s, "peaks.");
    f.get("min_amplitude_mv", c.peaks.min_amplitude_mv);
    f.get("min_separation_s", c.peaks.min_separation_s);
    f.finish();
  }
  top.get("segment_half_s", c.segment_half_s);
  top.get("merge_gap_s", c.merge_gap_s);
  if (const json* s = top.sub("forest")) {
    Fields f(*s, "forest.");
    f.get("n_trees", c.forest.n_trees);
    f.get("max_depth", c.forest.max_depth);
    f.get("max_features", c.forest.max_features);
    f.get("bootstrap", c.forest.bootstrap);
    f.get("min_samples_split", c.forest.min_samples_split);
    f.get("seed", c.forest.seed);
    f.finish();
  }
  if (const json* s = top.sub("preamble")) {
    Fields f(*s, "preamble.");
    f.get("threshold_mv", c.preamble.threshold_mv);
    f.get("refractory_s", c.preamble.refractory_s);
    f.finish();
  }
  if (const json* s = top.sub("eye")) {
    Fields f(*s, "eye.");
    f.get("ipd_mm", c.eye.ipd_mm);
    f.finish();
  }
  if (const json* s = top.sub("depths")) {
    Fields f(*s, "depths.");
    f.get("near_cm", c.depths.near_cm);
    f.get("mid_cm", c.depths.mid_cm);
    f.get("far_cm", c.depths.far_cm);
    f.finish();
  }
  top.get("seed", c.seed);
  top.get("min_accuracy", c.min_accuracy);
  top.get("max_false_positive_rate", c.max_false_positive_rate);
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config file '" + path + "'");
  out << config_to_json(c);
}

RunConfig resolve_config(const std::string& path) {
  if (!path.empty()) return load_config(path);
  if (const char* env = std::getenv("EOGV_CONFIG"); env && *env) return load_config(env);
  return RunConfig{};
}

std::string config_hash(const RunConfig& c) {
  const std::string canon = to_json(c).dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace eogv
