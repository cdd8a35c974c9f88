#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "einsel/harness.hpp"

using namespace einsel;
using namespace einsel::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(EINSEL_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("einsel-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::create_directories(dir);
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

RunOutcome run_to(const fs::path& config, const fs::path& out, std::string* err_text = nullptr) {
  std::ostringstream err;
  RunOptions opt;
  opt.output_dir = out;
  auto r = run(config, opt, err);
  if (err_text) *err_text = err.str();
  return r;
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

json manifest_of(const fs::path& dir) { return json::parse(read_file((dir / kManifestName).string())); }

std::vector<std::string> report_lines(const fs::path& config, const std::string& name) {
  const auto out = scratch(name);
  REQUIRE(run_to(config, out).exit_code == kExitOk);
  return make_report(out).lines;
}

bool has_line(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("malformed config exits 2 and writes nothing") {
  const auto base = scratch("malformed");
  const auto out = base / "out";
  std::string err;
  const auto r = run_to(write_config(base, "{\"scenario\": \"g2\", "), out, &err);
  CHECK(r.exit_code == kExitParse);
  CHECK_FALSE(fs::exists(out));
  const auto line = json::parse(err);
  CHECK(line["status"] == "error");
  CHECK(line["exit_code"] == 2);

  CHECK(run_to(write_config(base, "[1, 2]"), out).exit_code == kExitParse);
  CHECK(run_to(write_config(base, "{\"seed\": 1}"), out).exit_code == kExitParse);
  CHECK(run_to(base / "absent.json", out).exit_code == kExitParse);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("validation failures exit 3 leaving only a failed manifest") {
  const auto base = scratch("validation");
  const std::vector<std::string> bad{
      // unknown parameter
      R"({"scenario": "evolve", "parameters": {"oscillators": {"omega_a": 1, "omega_b": 1, "lambda": 0.1, "cutoff_a": 8,
          "cutoff_b": 8}, "initial": {"type": "fock", "n_a": 1, "n_b": 0}, "samples": 4, "sampels": 5}})",
      // stochastic without seed
      R"({"scenario": "clicks", "parameters": {"stream": {"simulate": {"source": {"kind": "coherent", "rate": 10},
          "detectors": [{"efficiency": 0.5, "dark_rate": 0}, {"efficiency": 0.5, "dark_rate": 0}], "duration": 1}}}})",
      // unknown scenario
      R"({"scenario": "teleport", "parameters": {}})",
      // nonphysical white-noise fraction
      R"({"scenario": "tomo_sim", "seed": 1, "parameters": {"state": {"kind": "singlet"}, "scheme": "mub",
          "shots": 100, "noise": {"white_fraction": 1.5}}})"};
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const auto out = base / ("out" + std::to_string(i));
    std::string err;
    const auto r = run_to(write_config(base / std::to_string(i), bad[i]), out, &err);
    INFO(bad[i] << "\n" << err);
    CHECK(r.exit_code == kExitValidation);
    CHECK(json::parse(err)["kind"] == "validation");
    if (fs::exists(out)) {
      CHECK(listing(out) == std::set<std::string>{kManifestName});
      const auto m = manifest_of(out);
      CHECK(m["status"] == "failed");
      CHECK(m["failure"]["exit_code"] == 3);
      CHECK(m["artifacts"].empty());
    }
  }
}

TEST_CASE("numeric failures exit 4 without partial artifacts") {
  const auto base = scratch("numeric");
  const auto out = base / "out";
  const auto cfg = write_config(base, R"({"scenario": "evolve", "parameters": {
      "oscillators": {"omega_a": 1, "omega_b": 1, "lambda": 0.1, "cutoff_a": 4, "cutoff_b": 4},
      "initial": {"type": "coherent", "mu_a": [3.0, 0.0], "mu_b": 0}, "samples": 8}})");
  const auto r = run_to(cfg, out);
  CHECK(r.exit_code == kExitNumeric);
  CHECK(listing(out) == std::set<std::string>{kManifestName});
  CHECK(manifest_of(out)["failure"]["kind"] == "numeric");
}

TEST_CASE("output directory holding foreign files is refused") {
  const auto out = scratch("foreign");
  fs::create_directories(out);
  std::ofstream(out / "notes.txt") << "keep me";
  CHECK(run_to(kConfigs / "bell_singlet.json", out).exit_code == kExitValidation);
  CHECK(listing(out) == std::set<std::string>{"notes.txt"});
}

TEST_CASE("rerunning into a run directory replaces it") {
  const auto out = scratch("rerun");
  REQUIRE(run_to(kConfigs / "evolve_fock.json", out).exit_code == kExitOk);
  const auto first = listing(out);
  REQUIRE(run_to(kConfigs / "evolve_fock.json", out).exit_code == kExitOk);
  CHECK(listing(out) == first);
  CHECK(first.contains("summary.json"));
  CHECK(first.contains("trajectory.csv"));
}

TEST_CASE("runs are byte-identical apart from manifest timestamps") {
  for (const char* name : {"clicks_coherent.json", "tomo_sim_singlet.json", "decay_fit_hyperbolic.json"}) {
    INFO(name);
    const auto a = scratch(std::string("det-a-") + name), b = scratch(std::string("det-b-") + name);
    REQUIRE(run_to(kConfigs / name, a).exit_code == kExitOk);
    REQUIRE(run_to(kConfigs / name, b).exit_code == kExitOk);
    REQUIRE(listing(a) == listing(b));
    for (const auto& f : listing(a)) {
      if (f == kManifestName) continue;
      CHECK(read_file((a / f).string()) == read_file((b / f).string()));
    }
    auto ma = manifest_of(a), mb = manifest_of(b);
    for (auto* m : {&ma, &mb}) {
      m->erase("started_utc");
      m->erase("finished_utc");
    }
    CHECK(ma == mb);
  }
}

TEST_CASE("manifest digests match the artifacts and report detects tampering") {
  const auto out = scratch("digests");
  REQUIRE(run_to(kConfigs / "counting_coherent.json", out).exit_code == kExitOk);
  const auto m = manifest_of(out);
  CHECK(m["seed"] == 11);
  CHECK(m["config_sha256"].get<std::string>().size() == 64);
  for (const auto& a : m["artifacts"]) {
    const auto bytes = read_file((out / a["name"].get<std::string>()).string());
    CHECK(a["bytes"] == bytes.size());
    CHECK(a["sha256"] == sha256_hex(bytes));
  }
  std::ofstream(out / "summary.json", std::ios::app) << " ";
  CHECK_THROWS_AS(make_report(out), ValidationError);
  fs::remove(out / "summary.json");
  CHECK_THROWS_WITH(make_report(out), Catch::Matchers::ContainsSubstring("missing artifact"));
}

TEST_CASE("the shipped configs together exercise every module operation") {
  std::set<std::string> used;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".json") continue;
    INFO(e.path().string());
    const auto out = scratch("cover-" + e.path().stem().string());
    REQUIRE(run_to(e.path(), out).exit_code == kExitOk);
    const auto m = manifest_of(out);
    for (const auto& op : m["operations"]) used.insert(op.get<std::string>());
  }
  const auto& all = module_operations();
  CHECK(used == std::set<std::string>(all.begin(), all.end()));
}

TEST_CASE("report lines carry the physical verdicts") {
  CHECK(has_line(report_lines(kConfigs / "bell_singlet.json", "rep-bell"), "S = 2.828427 (> 2: local realism violated)"));
  CHECK(has_line(report_lines(kConfigs / "g2_thermal.json", "rep-g2"), "(bunched)"));
  CHECK(has_line(report_lines(kConfigs / "counting_coherent.json", "rep-counting"), "(Poissonian)"));
  CHECK(has_line(report_lines(kConfigs / "full_pipeline_singlet.json", "rep-pipeline"), "entanglement certified"));
}

TEST_CASE("click files round-trip and reject decreasing timestamps") {
  photon::ClickStream s;
  s.duration = 1e-3;
  s.events = {{10, 0}, {10, 1}, {250, 0}, {999'999, 1}};
  const auto text = photon::to_clickstream_text(s);
  std::istringstream in(text);
  const auto back = photon::read_clickstream(in);
  CHECK(back.duration == s.duration);
  REQUIRE(back.events.size() == s.events.size());
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    CHECK(back.events[i].time_ns == s.events[i].time_ns);
    CHECK(back.events[i].detector == s.events[i].detector);
  }
  CHECK(photon::to_clickstream_text(back) == text);

  std::istringstream bad("# clickstream v1 duration_s=1\n100\t0\n50\t1\n");
  try {
    photon::read_clickstream(bad);
    FAIL("decreasing timestamp accepted");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
  }

  std::istringstream empty("# clickstream v1 duration_s=2.5\n");
  const auto none = photon::read_clickstream(empty);
  CHECK(none.events.empty());
  CHECK(none.duration == 2.5);
  const auto summary = ingest_summary(none);
  CHECK(summary.is_object());
}

TEST_CASE("ingest summary of the shipped coherent clicks") {
  const auto s = photon::read_clickstream_file((kConfigs / "data" / "coherent_clicks.txt").string());
  const auto j = ingest_summary(s);
  CHECK(j["events"] == s.events.size());
  CHECK_FALSE(ingest_lines(j).empty());
}

TEST_CASE("count tables survive a JSON round trip") {
  const auto t = tomo::simulate_tomography(tomo::werner(0.9), tomo::scheme(tomo::SchemeKind::kSic), 5000, {0.0}, 3);
  const auto j = count_table_to_json(t);
  const auto back = count_table_from_json(j);
  CHECK(back.counts == t.counts);
  CHECK(back.shots_per_setting == t.shots_per_setting);
  CHECK(count_table_to_json(back).dump() == j.dump());

  auto broken = j;
  broken["counts"].erase(broken["counts"].begin().key());
  CHECK_THROWS(count_table_from_json(broken));
}
