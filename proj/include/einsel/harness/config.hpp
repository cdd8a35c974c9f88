#pragma once

// Scenario configuration: one JSON document per run.
//
//   {
//     "scenario": "g2",
//     "seed": 7,
//     "output": {"directory": "runs/g2", "formats": ["csv", "json"]},
//     "parameters": { ...kind-specific block... }
//   }
//
// Unknown keys anywhere are rejected so a typo cannot silently fall back to a default.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "einsel/core/error.hpp"
#include "einsel/harness/io.hpp"

namespace einsel::harness {

// Malformed configuration text or structure (exit 2).
class ParseError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kOutputRootEnv = "EINSEL_OUTPUT_ROOT";

enum class ScenarioKind { kEvolve, kEinScan, kClicks, kG2, kCounting, kDecayFit, kTomoSim, kTomoFit, kBell, kFullPipeline };

inline const std::vector<std::pair<ScenarioKind, std::string>>& scenario_names() {
  static const std::vector<std::pair<ScenarioKind, std::string>> names{
      {ScenarioKind::kEvolve, "evolve"},     {ScenarioKind::kEinScan, "ein_scan"},
      {ScenarioKind::kClicks, "clicks"},     {ScenarioKind::kG2, "g2"},
      {ScenarioKind::kCounting, "counting"}, {ScenarioKind::kDecayFit, "decay_fit"},
      {ScenarioKind::kTomoSim, "tomo_sim"},  {ScenarioKind::kTomoFit, "tomo_fit"},
      {ScenarioKind::kBell, "bell"},         {ScenarioKind::kFullPipeline, "full_pipeline"}};
  return names;
}

inline const std::string& to_string(ScenarioKind k) {
  for (const auto& [kind, name] : scenario_names())
    if (kind == k) return name;
  throw std::logic_error("unnamed scenario kind");
}

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : scenario_names())
    if (name == s) return kind;
  throw ValidationError("unknown scenario '" + s + "'");
}

/// Typed, path-aware view of a JSON object. Every key read is recorded so that
/// `reject_unknown` can flag the ones nobody asked for.
class Params {
 public:
  Params(const json& j, std::string path, std::shared_ptr<std::set<std::string>> seen)
      : j_(&j), path_(std::move(path)), seen_(std::move(seen)) {
    if (!j.is_object()) throw ValidationError(where() + " must be an object");
  }

  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const { return j_->contains(key); }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ValidationError(name(key) + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(name(key) + " must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      throw ValidationError(name(key) + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const { return has(key) ? integer(key) : fallback; }

  std::string string(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ValidationError(name(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) const { return has(key) ? string(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ValidationError(name(key) + " must be true or false");
    return v.get<bool>();
  }

  Params object(const std::string& key) const { return Params(at(key), name(key), seen_); }
  std::optional<Params> optional_object(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return object(key);
  }

  std::vector<Params> objects(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw ValidationError(name(key) + " must be an array");
    std::vector<Params> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], name(key) + "[" + std::to_string(i) + "]", seen_);
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw ValidationError(name(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) throw ValidationError(name(key) + " must hold finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// A number or a [re, im] pair.
  cplx complex(const std::string& key, cplx fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (v.is_number()) return number(key);
    const auto xs = numbers(key);
    if (xs.size() != 2) throw ValidationError(name(key) + " must be a number or [re, im]");
    return {xs[0], xs[1]};
  }

  /// Whole subtree taken as-is; nothing below it is checked for unknown keys.
  const json& raw(const std::string& key) const { return at(key); }

 private:
  std::string name(const std::string& key) const { return path_ + "." + key; }
  std::string where() const { return "'" + path_ + "'"; }

  const json& at(const std::string& key) const {
    if (!j_->contains(key)) throw ValidationError("missing required parameter '" + name(key) + "'");
    seen_->insert(name(key));
    return (*j_)[key];
  }

  const json* j_;
  std::string path_;
  std::shared_ptr<std::set<std::string>> seen_;
};

namespace detail {

inline void reject_unknown(const json& j, const std::string& path, const std::set<std::string>& seen) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string p = path + "." + it.key();
      if (!seen.contains(p)) throw ValidationError("unknown parameter '" + p + "'");
      reject_unknown(it.value(), p, seen);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      if (j[i].is_object()) reject_unknown(j[i], path + "[" + std::to_string(i) + "]", seen);
  }
}

}  // namespace detail

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kEvolve;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir;
  bool csv = true;
  bool json_tables = true;
  json parameters = json::object();
  std::filesystem::path base_dir;  // relative input paths resolve against the config's directory
  std::string sha256;              // of the canonical (re-serialized) document

  std::uint64_t require_seed() const {
    if (!seed) throw ValidationError("scenario '" + to_string(kind) + "' is stochastic: 'seed' is required");
    return *seed;
  }

  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
};

/// Structural errors (not JSON, not an object, missing 'scenario') are ParseError;
/// wrong values are ValidationError. `output_override` wins over the file.
inline ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& config_path,
                                   const std::optional<std::filesystem::path>& output_override = std::nullopt) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  if (!doc.contains("scenario") || !doc["scenario"].is_string()) throw ParseError("config needs a string 'scenario'");

  ScenarioConfig cfg;
  cfg.sha256 = sha256_hex(doc.dump());
  cfg.base_dir = config_path.has_parent_path() ? config_path.parent_path() : std::filesystem::path(".");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "scenario" && it.key() != "seed" && it.key() != "output" && it.key() != "parameters")
      throw ValidationError("unknown top-level key '" + it.key() + "'");

  cfg.kind = scenario_kind_from_string(doc["scenario"].get<std::string>());
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_unsigned()) throw ValidationError("'seed' must be a nonnegative 64-bit integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_object()) throw ValidationError("'parameters' must be an object");
    cfg.parameters = doc["parameters"];
  }

  std::optional<std::filesystem::path> dir;
  if (doc.contains("output")) {
    auto seen = std::make_shared<std::set<std::string>>();
    Params out(doc["output"], "output", seen);
    if (out.has("directory")) dir = cfg.resolve(out.string("directory"));
    if (out.has("formats")) {
      const auto& f = out.raw("formats");
      if (!f.is_array() || f.empty()) throw ValidationError("'output.formats' must be a non-empty array");
      cfg.csv = cfg.json_tables = false;
      for (const auto& e : f) {
        const std::string v = e.is_string() ? e.get<std::string>() : "";
        if (v == "csv") cfg.csv = true;
        else if (v == "json") cfg.json_tables = true;
        else throw ValidationError("output format must be \"csv\" or \"json\"");
      }
    }
    detail::reject_unknown(doc["output"], "output", *seen);
  }
  if (output_override) {
    cfg.output_dir = *output_override;
  } else if (dir) {
    cfg.output_dir = *dir;
  } else {
    const char* root = std::getenv(kOutputRootEnv);
    cfg.output_dir = std::filesystem::path(root && *root ? root : "runs") / (to_string(cfg.kind) + "-" + cfg.sha256.substr(0, 12));
  }
  return cfg;
}

}  // namespace einsel::harness
