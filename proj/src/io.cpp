#include "eogv/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace eogv {

namespace {

constexpr std::string_view kRecordingMagic = "# eogv-recording";
constexpr std::string_view kEventsMagic = "# eogv-events";
constexpr std::string_view kDetectionsMagic = "# eogv-detections";
constexpr std::string_view kModelMagic = "eogv-model";
constexpr std::string_view kVersion = "v1";

std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string num_int(T v) {
  return std::to_string(v);
}

[[noreturn]] void fail(size_t line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

double parse_num(std::string_view s, size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(line, "bad number '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) fail(line, "non-finite number '" + std::string(s) + "'");
  return v;
}

template <class T>
T parse_int(std::string_view s, size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    fail(line, "bad integer '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

struct Lines {
  explicit Lines(const std::string& text) {
    std::string_view s(text);
    size_t start = 0;
    while (start < s.size()) {
      size_t p = s.find('\n', start);
      if (p == std::string_view::npos) p = s.size();
      std::string_view line = s.substr(start, p - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = p + 1;
    }
  }
  std::vector<std::string_view> lines;
};

// "# magic v1 key=value key=value"
std::map<std::string, std::string> parse_header(std::string_view line, std::string_view magic) {
  if (line.substr(0, magic.size()) != magic) fail(1, "missing '" + std::string(magic) + "' header");
  const auto tokens = split(line.substr(magic.size()), ' ');
  std::map<std::string, std::string> kv;
  bool version = false;
  for (auto t : tokens) {
    if (t.empty()) continue;
    if (!version) {
      if (t != kVersion) fail(1, "unsupported format version '" + std::string(t) + "'");
      version = true;
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string_view::npos) fail(1, "malformed header field '" + std::string(t) + "'");
    kv[std::string(t.substr(0, eq))] = std::string(t.substr(eq + 1));
  }
  if (!version) fail(1, "missing format version");
  return kv;
}

void expect_columns(const Lines& L, size_t idx, std::string_view cols) {
  if (L.lines.size() <= idx || L.lines[idx] != cols) fail(idx + 1, "expected column header '" + std::string(cols) + "'");
}

} // namespace

// ---------------------------------------------------------------------------

std::string format_recording(const Recording& rec, const std::string& config_hash) {
  rec.validate();
  std::string out;
  out.reserve(rec.size() * 40 + 128);
  out += std::string(kRecordingMagic) + " " + std::string(kVersion) + " sample_rate=" + num(rec.sample_rate) +
         " start_time=" + num(rec.start_time) + " channels=left,right";
  if (!config_hash.empty()) out += " config_hash=" + config_hash;
  out += "\ntime_s,left_mV,right_mV\n";
  for (size_t i = 0; i < rec.size(); ++i) {
    out += num(rec.time_at(i));
    out += ',';
    out += num(rec.channels[kLeft][i]);
    out += ',';
    out += num(rec.channels[kRight][i]);
    out += '\n';
  }
  return out;
}

RecordingFile parse_recording(const std::string& text) {
  const Lines L(text);
  if (L.lines.empty()) fail(1, "empty recording file");
  const auto kv = parse_header(L.lines[0], kRecordingMagic);
  RecordingFile f;
  auto get = [&](const char* k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) fail(1, std::string("header lacks '") + k + "'");
    return it->second;
  };
  f.recording.sample_rate = parse_num(get("sample_rate"), 1);
  f.recording.start_time = parse_num(get("start_time"), 1);
  if (get("channels") != "left,right") fail(1, "expected channels=left,right");
  if (auto it = kv.find("config_hash"); it != kv.end()) f.config_hash = it->second;
  if (!(f.recording.sample_rate > 0.0)) fail(1, "sample_rate must be positive");
  expect_columns(L, 1, "time_s,left_mV,right_mV");

  for (size_t i = 2; i < L.lines.size(); ++i) {
    const size_t ln = i + 1;
    if (L.lines[i].empty()) fail(ln, "empty data row");
    const auto cols = split(L.lines[i], ',');
    if (cols.size() != 3) fail(ln, "expected 3 columns, got " + std::to_string(cols.size()));
    const double t = parse_num(cols[0], ln);
    const double expected = f.recording.time_at(f.recording.size());
    if (std::abs(t - expected) > 1e-9) {
      fail(ln, "time " + std::string(cols[0]) + " breaks uniform sampling (expected " + num(expected) + ")");
    }
    f.recording.channels[kLeft].push_back(parse_num(cols[1], ln));
    f.recording.channels[kRight].push_back(parse_num(cols[2], ln));
  }
  return f;
}

std::string format_events(const std::vector<EventSpan>& events) {
  std::string out = std::string(kEventsMagic) + " " + std::string(kVersion) + "\nonset_s,offset_s,label\n";
  for (const auto& e : events) {
    if (e.label.find_first_of(",\n\r") != std::string::npos) {
      throw std::invalid_argument("event label '" + e.label + "' contains a separator");
    }
    out += num(e.onset) + "," + num(e.offset) + "," + e.label + "\n";
  }
  return out;
}

std::vector<EventSpan> parse_events(const std::string& text) {
  const Lines L(text);
  if (L.lines.empty()) fail(1, "empty event file");
  parse_header(L.lines[0], kEventsMagic);
  expect_columns(L, 1, "onset_s,offset_s,label");
  std::vector<EventSpan> out;
  for (size_t i = 2; i < L.lines.size(); ++i) {
    const size_t ln = i + 1;
    const auto cols = split(L.lines[i], ',');
    if (cols.size() != 3) fail(ln, "expected 3 columns, got " + std::to_string(cols.size()));
    EventSpan e{parse_num(cols[0], ln), parse_num(cols[1], ln), std::string(cols[2])};
    if (!(e.offset > e.onset)) fail(ln, "offset must exceed onset");
    if (e.label.empty()) fail(ln, "empty label");
    if (!out.empty() && e.onset < out.back().offset) fail(ln, "events overlap or are out of order");
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_detection_line(const Detection& d) {
  return num(d.timestamp_s) + "," + GestureLabel::from_index(d.label).name() + "," + num(d.confidence) + "," +
         num(d.window_start_s);
}

std::string format_detections(const std::vector<Detection>& dets, const std::string& config_hash) {
  std::string out = std::string(kDetectionsMagic) + " " + std::string(kVersion);
  if (!config_hash.empty()) out += " config_hash=" + config_hash;
  out += "\ntimestamp_s,label,confidence,window_start_s\n";
  for (const auto& d : dets) out += format_detection_line(d) + "\n";
  return out;
}

std::vector<Detection> parse_detections(const std::string& text) {
  const Lines L(text);
  if (L.lines.empty()) fail(1, "empty detection file");
  parse_header(L.lines[0], kDetectionsMagic);
  expect_columns(L, 1, "timestamp_s,label,confidence,window_start_s");
  std::vector<Detection> out;
  for (size_t i = 2; i < L.lines.size(); ++i) {
    const size_t ln = i + 1;
    const auto cols = split(L.lines[i], ',');
    if (cols.size() != 4) fail(ln, "expected 4 columns, got " + std::to_string(cols.size()));
    Detection d;
    d.timestamp_s = parse_num(cols[0], ln);
    try {
      d.label = GestureLabel::parse(cols[1]).index();
    } catch (const std::exception& e) {
      fail(ln, e.what());
    }
    d.confidence = parse_num(cols[2], ln);
    d.window_start_s = parse_num(cols[3], ln);
    out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model envelope: "eogv-model v1", then "key values..." lines, then "end".

namespace {

std::string join_nums(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += " " + num(x);
  return s;
}

void write_norm(std::string& out, const NormStats& n) {
  out += "norm_mean" + join_nums(n.mean) + "\n";
  out += "norm_std" + join_nums(n.stdev) + "\n";
  out += "norm_floored";
  for (bool b : n.floored) out += b ? " 1" : " 0";
  out += "\n";
}

class ModelReader {
public:
  explicit ModelReader(const std::string& text) : L_(text) {
    if (L_.lines.empty() || L_.lines[0] != std::string(kModelMagic) + " " + std::string(kVersion)) {
      fail(1, "not an eogv-model v1 file");
    }
    pos_ = 1;
  }

  // Next line split into key and values; checks the key.
  std::vector<std::string_view> expect(std::string_view key) {
    if (pos_ >= L_.lines.size()) fail(pos_ + 1, "unexpected end of file, expected '" + std::string(key) + "'");
    auto tokens = split(L_.lines[pos_], ' ');
    ++pos_;
    if (tokens.empty() || tokens[0] != key) fail(pos_, "expected '" + std::string(key) + "'");
    tokens.erase(tokens.begin());
    return tokens;
  }

  // Next line as key plus values, whatever the key.
  std::pair<std::string_view, std::vector<std::string_view>> next() {
    if (pos_ >= L_.lines.size()) fail(pos_ + 1, "unexpected end of file");
    auto tokens = split(L_.lines[pos_], ' ');
    ++pos_;
    const std::string_view key = tokens.front();
    tokens.erase(tokens.begin());
    return {key, tokens};
  }

  size_t line() const { return pos_; }

  std::vector<double> nums(std::string_view key, size_t count) {
    const auto t = expect(key);
    if (t.size() != count) {
      fail(pos_, "'" + std::string(key) + "' needs " + std::to_string(count) + " values, got " + std::to_string(t.size()));
    }
    std::vector<double> v;
    for (auto s : t) v.push_back(parse_num(s, pos_));
    return v;
  }

  std::string word(std::string_view key) {
    const auto t = expect(key);
    if (t.size() != 1) fail(pos_, "'" + std::string(key) + "' needs one value");
    return std::string(t[0]);
  }

  template <class T>
  T integer(std::string_view key) {
    return parse_int<T>(word(key), pos_);
  }

  NormStats norm(size_t d) {
    NormStats n;
    n.mean = nums("norm_mean", d);
    n.stdev = nums("norm_std", d);
    for (double s : n.stdev) {
      if (!(s > 0.0)) fail(pos_, "norm_std must be positive");
    }
    const auto f = expect("norm_floored");
    if (f.size() != d) fail(pos_, "'norm_floored' needs " + std::to_string(d) + " values");
    for (auto s : f) {
      if (s != "0" && s != "1") fail(pos_, "norm_floored values must be 0 or 1");
      n.floored.push_back(s == "1");
    }
    return n;
  }

  void end() {
    expect("end");
    if (pos_ != L_.lines.size()) fail(pos_ + 1, "trailing content after 'end'");
  }

private:
  Lines L_;
  size_t pos_{0};
};

} // namespace

std::string model_kind(const std::string& text) {
  ModelReader r(text);
  return r.word("kind");
}

std::string format_gate_model(const ArtifactModel& m, const std::string& config_hash) {
  if (!m.fitted()) throw std::invalid_argument("cannot save an unfitted gate model");
  std::string out = std::string(kModelMagic) + " " + std::string(kVersion) + "\n";
  out += "kind gate\n";
  out += "config_hash " + (config_hash.empty() ? std::string("-") : config_hash) + "\n";
  out += "features " + num_int(m.weights.size()) + "\n";
  write_norm(out, m.norm);
  out += "weights" + join_nums(m.weights) + "\n";
  out += "bias " + num(m.bias) + "\n";
  out += "iterations " + num_int(m.iterations) + "\n";
  out += "gradient_norm " + num(m.gradient_norm) + "\n";
  out += "end\n";
  return out;
}

GateModelFile parse_gate_model(const std::string& text) {
  ModelReader r(text);
  GateModelFile f;
  if (r.word("kind") != "gate") fail(r.line(), "model kind is not 'gate'");
  f.config_hash = r.word("config_hash");
  if (f.config_hash == "-") f.config_hash.clear();
  const auto d = r.integer<size_t>("features");
  if (d != kArtifactFeatureCount) {
    fail(r.line(), "gate model has " + std::to_string(d) + " features, expected " + std::to_string(kArtifactFeatureCount));
  }
  f.model.norm = r.norm(d);
  f.model.weights = r.nums("weights", d);
  f.model.bias = r.nums("bias", 1)[0];
  f.model.iterations = r.integer<int>("iterations");
  f.model.gradient_norm = r.nums("gradient_norm", 1)[0];
  r.end();
  return f;
}

std::string format_forest_model(const ForestModel& m, const std::string& config_hash) {
  if (!m.fitted()) throw std::invalid_argument("cannot save an unfitted forest model");
  std::string out = std::string(kModelMagic) + " " + std::string(kVersion) + "\n";
  out += "kind forest\n";
  out += "config_hash " + (config_hash.empty() ? std::string("-") : config_hash) + "\n";
  out += "features " + num_int(m.n_features) + "\n";
  out += "classes " + num_int(m.classes.size());
  for (int c : m.classes) out += " " + num_int(c);
  out += "\n";
  const auto& p = m.params;
  out += "params " + num_int(p.n_trees) + " " + num_int(p.max_depth) + " " + num_int(p.max_features) + " " +
         (p.bootstrap ? "1" : "0") + " " + num_int(p.min_samples_split) + " " + num_int(p.seed) + "\n";
  if (m.norm.size() == 0) {
    out += "norm none\n";
  } else {
    out += "norm present\n";
    write_norm(out, m.norm);
  }
  out += "trees " + num_int(m.trees.size()) + "\n";
  for (const auto& t : m.trees) {
    out += "tree " + num_int(t.nodes.size()) + "\n";
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        out += "leaf";
        for (int c : n.counts) out += " " + num_int(c);
      } else {
        out += "node " + num_int(n.feature) + " " + num(n.threshold) + " " + num_int(n.left) + " " + num_int(n.right);
      }
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

ForestModelFile parse_forest_model(const std::string& text) {
  ModelReader r(text);
  ForestModelFile f;
  ForestModel& m = f.model;
  if (r.word("kind") != "forest") fail(r.line(), "model kind is not 'forest'");
  f.config_hash = r.word("config_hash");
  if (f.config_hash == "-") f.config_hash.clear();
  m.n_features = r.integer<size_t>("features");
  if (m.n_features == 0) fail(r.line(), "forest needs at least one feature");

  const auto cls = r.expect("classes");
  if (cls.empty()) fail(r.line(), "'classes' needs a count");
  const auto nc = parse_int<size_t>(cls[0], r.line());
  if (cls.size() != nc + 1 || nc < 2) fail(r.line(), "bad class list");
  for (size_t i = 1; i < cls.size(); ++i) {
    m.classes.push_back(parse_int<int>(cls[i], r.line()));
    if (i > 1 && m.classes[i - 1] <= m.classes[i - 2]) fail(r.line(), "classes must be ascending");
  }

  const auto p = r.expect("params");
  if (p.size() != 6) fail(r.line(), "'params' needs 6 values");
  m.params.n_trees = parse_int<int>(p[0], r.line());
  m.params.max_depth = parse_int<int>(p[1], r.line());
  m.params.max_features = parse_int<int>(p[2], r.line());
  m.params.bootstrap = parse_int<int>(p[3], r.line()) != 0;
  m.params.min_samples_split = parse_int<int>(p[4], r.line());
  m.params.seed = parse_int<uint64_t>(p[5], r.line());

  const std::string norm = r.word("norm");
  if (norm == "present") {
    m.norm = r.norm(m.n_features);
  } else if (norm != "none") {
    fail(r.line(), "norm must be 'present' or 'none'");
  }

  const auto n_trees = r.integer<size_t>("trees");
  if (n_trees == 0) fail(r.line(), "forest has no trees");
  for (size_t t = 0; t < n_trees; ++t) {
    DecisionTree tree;
    const auto n_nodes = r.integer<size_t>("tree");
    if (n_nodes == 0) fail(r.line(), "empty tree");
    for (size_t k = 0; k < n_nodes; ++k) {
      TreeNode node;
      const auto [key, v] = r.next();
      if (key == "leaf") {
        if (v.size() != m.classes.size()) fail(r.line(), "leaf needs one count per class");
        for (auto c : v) node.counts.push_back(parse_int<int>(c, r.line()));
      } else if (key == "node") {
        if (v.size() != 4) fail(r.line(), "node needs feature, threshold, left, right");
        node.feature = parse_int<int>(v[0], r.line());
        node.threshold = parse_num(v[1], r.line());
        node.left = parse_int<int>(v[2], r.line());
        node.right = parse_int<int>(v[3], r.line());
        const auto in_tree = [&](int c) { return c > static_cast<int>(k) && c < static_cast<int>(n_nodes); };
        if (node.feature < 0 || static_cast<size_t>(node.feature) >= m.n_features) fail(r.line(), "split feature out of range");
        if (!in_tree(node.left) || !in_tree(node.right)) fail(r.line(), "child index out of range");
      } else {
        fail(r.line(), "expected 'leaf' or 'node'");
      }
      tree.nodes.push_back(std::move(node));
    }
    m.trees.push_back(std::move(tree));
  }
  r.end();
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

} // namespace eogv
