#pragma once

// `run`: config → validated plan → computation → artifacts + manifest.json.
//
// Exit status: 0 ok, 2 parse error (config or input file), 3 validation error,
// 4 numeric failure. Errors print one JSON line on the error stream. Artifacts
// are held in memory until the job succeeds; a failed run leaves only a
// manifest carrying the failure record.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "einsel/harness/scenarios.hpp"

#ifndef EINSEL_VERSION
#define EINSEL_VERSION "0.0.0"
#endif

namespace einsel::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitNumeric = 4;

inline constexpr const char* kManifestName = "manifest.json";

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path output_dir;  // empty when the config never got that far
  std::string reason;
  std::vector<std::string> artifacts;
};

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Failure {
  int code;
  std::string kind;
  std::string reason;
};

/// Maps a library exception onto the exit-status contract.
inline Failure classify(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ParseError& x) {
    return {kExitParse, "parse", x.what()};
  } catch (const FormatError& x) {
    return {kExitParse, "parse", x.what()};
  } catch (const ValidationError& x) {
    return {kExitValidation, "validation", x.what()};
  } catch (const DimensionError& x) {
    return {kExitValidation, "validation", x.what()};
  } catch (const NonPhysicalError& x) {
    return {kExitValidation, "validation", x.what()};
  } catch (const TruncationError& x) {
    return {kExitNumeric, "numeric", x.what()};
  } catch (const NumericError& x) {
    return {kExitNumeric, "numeric", x.what()};
  } catch (const std::exception& x) {
    return {kExitNumeric, "numeric", x.what()};
  } catch (...) {
    return {kExitNumeric, "numeric", "unknown error"};
  }
}

inline std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

/// The directory may be new, empty, or a previous run directory (manifest plus
/// the artifacts it lists); anything else is refused rather than overwritten.
inline void claim_directory(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) {
    fs::create_directories(dir);
    return;
  }
  if (!fs::is_directory(dir)) throw ValidationError("output path '" + dir.string() + "' is not a directory");
  std::set<std::string> owned{kManifestName};
  const auto manifest = dir / kManifestName;
  if (fs::exists(manifest)) {
    try {
      const auto m = json::parse(read_file(manifest.string()));
      for (const auto& a : m.value("artifacts", json::array())) owned.insert(a.value("name", ""));
    } catch (const json::exception&) {
      throw ValidationError("output directory '" + dir.string() + "' holds an unreadable manifest");
    }
  }
  std::vector<fs::path> remove;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || !owned.contains(name))
      throw ValidationError("output directory '" + dir.string() + "' contains '" + name + "' not written by a previous run");
    remove.push_back(entry.path());
  }
  for (const auto& p : remove) fs::remove(p);
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

}  // namespace detail

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
};

inline RunOutcome run(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err) {
  namespace fs = std::filesystem;
  RunOutcome outcome;
  const std::string started = detail::utc_now();

  const auto report_error = [&](const detail::Failure& f) {
    outcome.exit_code = f.code;
    outcome.reason = detail::one_line(f.reason);
    err << json{{"status", "error"}, {"exit_code", f.code}, {"kind", f.kind}, {"reason", outcome.reason}}.dump() << '\n';
  };

  // 1. parse: no output directory exists yet, so nothing is written on failure.
  std::optional<ScenarioConfig> cfg;
  try {
    std::string text;
    try {
      text = read_file(config_path.string());
    } catch (const FormatError& e) {
      throw ParseError(e.what());
    }
    cfg = parse_config(text, config_path, options.output_dir);
  } catch (...) {
    report_error(detail::classify(std::current_exception()));
    return outcome;
  }
  outcome.output_dir = cfg->output_dir;

  try {
    detail::claim_directory(cfg->output_dir);
  } catch (...) {
    report_error(detail::classify(std::current_exception()));
    return outcome;
  }

  RunContext ctx(*cfg);
  json manifest = {{"tool", "einsel"},
                   {"version", EINSEL_VERSION},
                   {"scenario", to_string(cfg->kind)},
                   {"config", config_path.string()},
                   {"config_sha256", cfg->sha256},
                   {"seed", cfg->seed ? json(*cfg->seed) : json(nullptr)},
                   {"started_utc", started}};

  // 2. validate, 3. compute; artifacts stay in memory until both succeed.
  std::exception_ptr failure;
  try {
    const Job job = plan(*cfg, ctx);
    job(ctx);
    ctx.file("summary.json", ctx.summary.dump(1) + "\n");
  } catch (...) {
    failure = std::current_exception();
  }

  std::vector<std::string> written;
  if (!failure) {
    try {
      for (const auto& a : ctx.artifacts) {
        detail::write_bytes(cfg->output_dir / a.name, a.content);
        written.push_back(a.name);
      }
    } catch (...) {
      failure = std::current_exception();
      for (const auto& name : written) fs::remove(cfg->output_dir / name);
      written.clear();
    }
  }

  json inputs = json::array();
  for (const auto& [path, digest] : ctx.inputs) inputs.push_back({{"path", path}, {"sha256", digest}});
  manifest["inputs"] = inputs;
  manifest["operations"] = json(std::vector<std::string>(ctx.operations.begin(), ctx.operations.end()));
  json artifacts = json::array();
  if (!failure)
    for (const auto& a : ctx.artifacts)
      artifacts.push_back({{"name", a.name}, {"bytes", a.content.size()}, {"sha256", sha256_hex(a.content)}});
  manifest["artifacts"] = artifacts;
  manifest["finished_utc"] = detail::utc_now();
  if (failure) {
    const auto f = detail::classify(failure);
    manifest["status"] = "failed";
    manifest["failure"] = {{"exit_code", f.code}, {"kind", f.kind}, {"reason", detail::one_line(f.reason)}};
    report_error(f);
  } else {
    manifest["status"] = "ok";
    outcome.artifacts = written;
  }
  try {
    detail::write_bytes(cfg->output_dir / kManifestName, manifest.dump(1) + "\n");
  } catch (...) {
    if (!failure) report_error(detail::classify(std::current_exception()));
  }
  return outcome;
}

}  // namespace einsel::harness
