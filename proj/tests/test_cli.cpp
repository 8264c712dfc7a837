#include <doctest.h>

#include "eogv/cli.hpp"
#include "eogv/eval.hpp"
#include "eogv/io.hpp"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace eogv;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eogv");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("eogv_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

size_t data_rows(const std::string& text) {
  size_t n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) n += !line.empty() && line[0] != '#';
  return n - 1;  // column line
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("synth is deterministic and writes 60 events") {
  Scratch s("synth");
  REQUIRE(cli({"synth", "-o", s / "a.csv", "-e", s / "a.ev"}).code == 0);
  REQUIRE(cli({"--seed", "7", "synth", "-o", s / "b.csv", "-e", s / "b.ev"}).code == 0);
  CHECK(read_file(s / "a.csv") == read_file(s / "b.csv"));
  CHECK(read_file(s / "a.ev") == read_file(s / "b.ev"));
  CHECK(data_rows(read_file(s / "a.ev")) == 60);
  REQUIRE(cli({"synth", "--seed", "8", "-o", s / "c.csv", "-e", s / "c.ev"}).code == 0);
  CHECK(read_file(s / "a.csv") != read_file(s / "c.csv"));
}

TEST_CASE("invalid synth spec exits with an error") {
  Scratch s("synth_bad");
  const auto r = cli({"synth", "--cue", "0.1", "-o", s / "a.csv", "-e", s / "a.ev"});
  CHECK(r.code == 2);
  CHECK(r.err.find("cue interval") != std::string::npos);
  CHECK(cli({"synth", "--artifacts", "sneeze", "-o", s / "a.csv", "-e", s / "a.ev"}).code == 2);
}

TEST_CASE("train, run and retrain") {
  Scratch s("train");
  REQUIRE(cli({"synth", "--seed", "3", "--rounds", "3", "-o", s / "a.csv", "-e", s / "a.ev"}).code == 0);
  REQUIRE(cli({"synth", "--seed", "4", "--rounds", "3", "-o", s / "b.csv", "-e", s / "b.ev"}).code == 0);
  const std::string recs = s / "a.csv" + "," + s / "b.csv";
  const std::string evs = s / "a.ev" + "," + s / "b.ev";
  REQUIRE(cli({"train", "--kind", "gesture", "--recordings", recs, "--events", evs, "-o", s / "g1.model"}).code == 0);
  REQUIRE(cli({"train", "--kind", "gesture", "--recordings", recs, "--events", evs, "-o", s / "g2.model"}).code == 0);
  CHECK(read_file(s / "g1.model") == read_file(s / "g2.model"));
  const auto forest = parse_forest_model(read_file(s / "g1.model"));
  CHECK(forest.model.classes.size() == 6);
  CHECK(format_forest_model(forest.model, forest.config_hash) == read_file(s / "g1.model"));

  REQUIRE(cli({"train", "--kind", "gate", "--synthetic", "-o", s / "gate.model"}).code == 0);
  REQUIRE(cli({"synth", "--seed", "5", "-o", s / "t.csv", "-e", s / "t.ev"}).code == 0);
  REQUIRE(cli({"train", "--kind", "gesture", "--synthetic", "-o", s / "gs.model"}).code == 0);
  const auto r = cli({"run", s / "t.csv", "--gate-model", s / "gate.model", "--gesture-model", s / "gs.model", "-o",
                      s / "d.txt", "--truth", s / "t.ev"});
  REQUIRE(r.code == 0);
  const auto dets = parse_detections(read_file(s / "d.txt"));
  const auto truth = parse_events(read_file(s / "t.ev"));
  const auto m = match_detections(dets, truth);
  CHECK(m.correct >= 57);
  CHECK(r.err.find("matched") != std::string::npos);
  // offline runs are repeatable
  REQUIRE(cli({"run", s / "t.csv", "--gate-model", s / "gate.model", "--gesture-model", s / "gs.model", "-o",
               s / "d2.txt"})
              .code == 0);
  CHECK(read_file(s / "d.txt") == read_file(s / "d2.txt"));

  // preamble without brow raises: nothing comes out
  const auto p = cli({"run", s / "t.csv", "--gate-model", s / "gate.model", "--gesture-model", s / "gs.model",
                      "--preamble", "-o", s / "p.txt"});
  REQUIRE(p.code == 0);
  CHECK(parse_detections(read_file(s / "p.txt")).empty());
  CHECK(p.out.empty());

  // models trained under another config are refused unless forced
  const auto mismatch = cli({"--seed", "99", "run", s / "t.csv", "--gate-model", s / "gate.model", "--gesture-model",
                             s / "gs.model"});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("--force") != std::string::npos);
  CHECK(cli({"--seed", "99", "run", s / "t.csv", "--gate-model", s / "gate.model", "--gesture-model", s / "gs.model",
             "--force"})
            .code == 0);
}

TEST_CASE("train without inputs is an error") {
  Scratch s("train_empty");
  CHECK(cli({"train", "--kind", "gesture", "-o", s / "g.model"}).code == 2);
  CHECK(cli({"train", "--kind", "gesture", "--recordings", s.dir.string(), "--events", s.dir.string(), "-o",
             s / "g.model"})
            .code == 2);
  CHECK_FALSE(fs::exists(s / "g.model"));
  CHECK(cli({"train", "--kind", "shape", "-o", s / "g.model"}).code == 2);
}

TEST_CASE("corrupt recording rows are reported with their line") {
  Scratch s("corrupt");
  REQUIRE(cli({"synth", "--rounds", "1", "-o", s / "a.csv", "-e", s / "a.ev"}).code == 0);
  std::string text = read_file(s / "a.csv");
  size_t pos = 0;
  for (int i = 0; i < 9; ++i) pos = text.find('\n', pos) + 1;  // start of line 10
  text.insert(pos, "x");
  write_file(s / "bad.csv", text);
  REQUIRE(cli({"train", "--kind", "gate", "--synthetic", "-o", s / "gate.model"}).code == 0);
  REQUIRE(cli({"train", "--kind", "gesture", "--recordings", s / "a.csv", "--events", s / "a.ev", "-o",
               s / "g.model"})
              .code == 0);
  const auto r = cli({"run", s / "bad.csv", "--gate-model", s / "gate.model", "--gesture-model", s / "g.model"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 10") != std::string::npos);
}

TEST_CASE("eval protocols and exit codes") {
  Scratch s("eval");
  const auto k = cli({"eval", "kfold", "--synthetic", "--out-dir", s.dir.string()});
  CHECK(k.code == 0);
  CHECK(k.out.find("accuracy_mean: ") != std::string::npos);
  CHECK(fs::exists(s / "report.txt"));
  CHECK(fs::exists(s / "report.csv"));
  CHECK(fs::exists(s / "confusion.csv"));
  const auto f = cli({"eval", "fpr", "--synthetic", "--preamble"});
  CHECK(f.code == 0);
  CHECK(f.out.find("events: 0\n") != std::string::npos);
  const auto u = cli({"eval", "leave-one-out"});
  CHECK(u.code == 2);
  // the 2x-gain user is only recovered with per-session standardisation
  const auto raw = cli({"eval", "cross-user", "--synthetic", "--four", "--no-session-norm"});
  CHECK(raw.code == 1);
  CHECK(raw.out.find("NOT met") != std::string::npos);
  CHECK(cli({"eval", "cross-user", "--synthetic", "--four"}).code == 0);
  write_file(s / "c.json", R"({"seed": 3})");
  const auto snr = cli({"--config", s / "c.json", "eval", "snr", "--synthetic"});
  CHECK(snr.code == 0);
  CHECK(snr.out.find("mean_snr_db: ") != std::string::npos);
}

TEST_CASE("bench") {
  const auto r = cli({"bench", "--windows", "100"});
  CHECK(r.code == 0);
  CHECK(r.out.find("windows: 100\n") != std::string::npos);
  CHECK(r.out.find("realtime: yes") != std::string::npos);
  CHECK(cli({"bench", "--windows", "0"}).code == 2);
}

TEST_CASE("geometry") {
  auto angle = cli({"geometry", "angle", "--ipd", "50", "--dist", "30"});
  CHECK(angle.code == 0);
  CHECK(std::stod(angle.out) == doctest::Approx(9.53).epsilon(0.0005));
  CHECK(angle.out == "9.527\n");
  auto stereo = cli({"geometry", "stereo", "--L", "200", "--d", "5", "--e", "30"});
  CHECK(stereo.code == 0);
  CHECK(std::stod(stereo.out) == doctest::Approx(28.33).epsilon(0.0002));
  auto delta = cli({"geometry", "delta", "--from", "200", "--to", "30"});
  CHECK(delta.code == 0);
  CHECK(std::stod(delta.out) == doctest::Approx(8.1).epsilon(0.001));
  auto focal = cli({"geometry", "focal", "--d", "-1", "--dp", "5"});
  CHECK(focal.code == 2);
  CHECK_FALSE(focal.err.empty());
  CHECK(cli({"geometry", "angle", "--dist", "0"}).code == 2);
}

TEST_CASE("config and usage") {
  const auto c = cli({"config"});
  CHECK(c.code == 0);
  CHECK(c.out.find("\"mad_multiplier\": 4.5") != std::string::npos);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

}
