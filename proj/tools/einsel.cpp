// einsel run <config> | ingest <file> --summary | report <run-dir>

#include <CLI11.hpp>

#include <iostream>

#include "einsel/harness.hpp"

using namespace einsel;
using namespace einsel::harness;

namespace {

int error_line(int code, const std::string& kind, const std::string& reason) {
  std::cerr << json{{"status", "error"}, {"exit_code", code}, {"kind", kind}, {"reason", reason}}.dump() << '\n';
  return code;
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (...) {
    const auto f = harness::detail::classify(std::current_exception());
    return error_line(f.code, f.kind, f.reason);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"einsel: coupled-mode dynamics, photon statistics and two-qubit tomography experiments"};
  app.set_version_flag("--version", std::string("einsel ") + EINSEL_VERSION);
  app.require_subcommand(1);

  std::string config, output;
  auto* run_cmd = app.add_subcommand("run", "run one scenario config; writes artifacts and manifest.json");
  run_cmd->add_option("config", config, "scenario config (JSON)")->required();
  run_cmd->add_option("-o,--output", output, std::string("output directory (default: from the config, else $") + kOutputRootEnv +
                                                 "/<scenario>-<hash>)");

  std::string click_file;
  bool summary = false;
  IngestOptions ingest_opt;
  double window = 0.0;
  auto* ingest_cmd = app.add_subcommand("ingest", "validate a clickstream v1 file");
  ingest_cmd->add_option("file", click_file, "click file")->required();
  ingest_cmd->add_flag("--summary", summary, "print rates, waiting-time, counting and g2 statistics");
  ingest_cmd->add_option("--window", window, "counting window in seconds (default duration/1000)");
  ingest_cmd->add_option("--bin-width", ingest_opt.bin_width, "g2 bin width in seconds")->capture_default_str();
  ingest_cmd->add_option("--max-lag", ingest_opt.max_lag, "g2 maximum lag in seconds")->capture_default_str();
  bool ingest_json = false;
  ingest_cmd->add_flag("--json", ingest_json, "print the summary as JSON");

  std::string run_dir;
  bool report_json = false;
  auto* report_cmd = app.add_subcommand("report", "summarize a run directory");
  report_cmd->add_option("run-dir", run_dir, "directory written by 'run'")->required();
  report_cmd->add_flag("--json", report_json, "print JSON instead of text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParse;
  }

  if (*run_cmd) {
    RunOptions opt;
    if (!output.empty()) opt.output_dir = output;
    const auto r = harness::run(config, opt, std::cerr);
    if (r.exit_code == kExitOk) std::cout << r.output_dir.string() << '\n';
    return r.exit_code;
  }
  if (*ingest_cmd) {
    return guarded([&] {
      const auto stream = photon::read_clickstream_file(click_file);
      if (window > 0.0) ingest_opt.window = window;
      if (!summary) {
        std::cout << "ok: " << stream.events.size() << " events, " << stream.detector_ids().size() << " detectors, duration "
                  << stream.duration << " s\n";
        return kExitOk;
      }
      const auto s = ingest_summary(stream, ingest_opt);
      if (ingest_json) std::cout << s.dump(1) << '\n';
      else
        for (const auto& l : ingest_lines(s)) std::cout << l << '\n';
      return kExitOk;
    });
  }
  return guarded([&] {
    const auto r = make_report(run_dir);
    if (report_json) std::cout << r.data.dump(1) << '\n';
    else std::cout << r.text();
    return kExitOk;
  });
}
