#pragma once

// `report`: human-readable lines and JSON from a run directory, and the
// `ingest --summary` digest of a click file.

#include <cstdarg>
#include <cstdio>
#include <filesystem>

#include "einsel/harness/run.hpp"

namespace einsel::harness {

struct Report {
  std::vector<std::string> lines;
  json data;

  std::string text() const {
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }
};

namespace detail {

inline std::string printf_string(const char* format, ...) __attribute__((format(printf, 1, 2)));
inline std::string printf_string(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

inline double num(const json& j, const char* key) {
  return j.contains(key) && j[key].is_number() ? j[key].get<double>() : std::nan("");
}

inline std::string with_error(const char* format, const json& j) {
  std::string s = printf_string(format, num(j, "value"));
  if (j.contains("standard_error")) s += printf_string(" ± %.4f", num(j, "standard_error"));
  return s;
}

inline std::string bell_line(const json& chsh) {
  const double s = num(chsh, "value");
  std::string out = with_error("S = %.6f", chsh);
  const char* lhs = s < 0.0 ? "|S| " : "";
  return out + (std::abs(s) > 2.0 ? printf_string(" (%s> 2: local realism violated)", lhs)
                                   : printf_string(" (%s<= 2: no violation)", lhs));
}

inline void tomography_lines(const json& s, std::vector<std::string>& lines) {
  lines.push_back(printf_string("estimate: %s, %s, %llu iterations, log-likelihood %.6g", s.value("method", "?").c_str(),
                                s.value("physical", false) ? "physical" : "NOT physical",
                                static_cast<unsigned long long>(s.value("iterations", 0)), num(s, "log_likelihood")));
  if (s.contains("noise")) lines.push_back(printf_string("white-noise fraction %.4g", num(s["noise"], "white_fraction")));
  if (!s.contains("concurrence")) {
    if (s.contains("note")) lines.push_back(s["note"].get<std::string>());
    return;
  }
  lines.push_back(with_error("concurrence C = %.4f", s["concurrence"]));
  const double w = num(s["witness"], "value");
  lines.push_back(with_error("witness = %.4f", s["witness"]) + (w < 0.0 ? " (< 0: entanglement certified)" : " (>= 0: not certified)"));
  lines.push_back(bell_line(s["chsh"]));
  if (s.contains("fidelity_to_truth"))
    lines.push_back(printf_string("fidelity to truth = %.6f, trace distance %.3g", num(s, "fidelity_to_truth"),
                                  num(s, "trace_distance_to_truth")));
}

inline std::vector<std::string> summary_lines(ScenarioKind kind, const json& s) {
  std::vector<std::string> lines;
  switch (kind) {
    case ScenarioKind::kEvolve: {
      const auto& e = s["entropy"];
      lines.push_back(printf_string("reduced entropy over %llu samples: max %.3g nats, min %.3g, mean %.3g",
                                    static_cast<unsigned long long>(s.value("samples", 0)), num(e, "max"), num(e, "min"),
                                    num(e, "mean")));
      lines.push_back(printf_string("coherence defect max %.3g; amplitude-flow deviation max %.3g; Schmidt rank max %llu",
                                    num(s, "max_coherence_defect"), num(s, "max_flow_deviation"),
                                    static_cast<unsigned long long>(s.value("max_schmidt_rank", 0))));
      lines.push_back(printf_string("initial biorthogonal leakage %.3g", num(s, "initial_leakage")));
      break;
    }
    case ScenarioKind::kEinScan:
      lines.push_back(printf_string("%llu candidates; lowest mean entropy %s (%.3g nats); highest %s (%.3g nats)",
                                    static_cast<unsigned long long>(s.value("candidates", 0)),
                                    s["lowest"].value("label", "?").c_str(), num(s["lowest"], "mean_entropy"),
                                    s["highest"].value("label", "?").c_str(), num(s["highest"], "mean_entropy")));
      lines.push_back(std::string("coherent products strictly below every other candidate: ") +
                      (s.value("coherent_products_minimal", false) ? "yes" : "no"));
      break;
    case ScenarioKind::kClicks:
    case ScenarioKind::kG2:
    case ScenarioKind::kCounting: {
      lines.push_back(printf_string("%llu events over %.6g s", static_cast<unsigned long long>(s.value("events", 0)),
                                    num(s, "duration_s")));
      for (auto it = s["detectors"].begin(); it != s["detectors"].end(); ++it) {
        const auto& d = it.value();
        std::string l = printf_string("detector %s: %llu events, rate %.6g /s", it.key().c_str(),
                                       static_cast<unsigned long long>(d.value("events", 0)), num(d, "rate"));
        if (d.contains("waiting_times") && d["waiting_times"].is_object()) {
          const auto& w = d["waiting_times"];
          l += printf_string("; waiting times KS D = %.4g (p = %.3g, %s)", num(w, "ks_distance"), num(w, "ks_p_value"),
                             w.value("exponential", false) ? "exponential" : "non-exponential");
        }
        lines.push_back(l);
      }
      if (s.contains("coincidences")) {
        const auto& c = s["coincidences"];
        lines.push_back(printf_string("coincidences in %.3g s window: raw %llu, accidental %.4g, corrected %.4g%s",
                                      num(c, "window_s"), static_cast<unsigned long long>(c.value("raw", 0)),
                                      num(c, "accidental"), num(c, "corrected"),
                                      c.value("correction_dominates", false) ? " (accidentals dominate)" : ""));
      }
      if (s.contains("g2") && s["g2"].is_object()) {
        const auto& g = s["g2"];
        lines.push_back(printf_string("g2(0) ≈ %.3f ± %.3f (%s)", num(g, "zero_lag"), num(g, "zero_lag_standard_error"),
                                      g.value("verdict", "?").c_str()));
      }
      if (s.contains("counting") && s["counting"].is_object()) {
        const auto& c = s["counting"];
        lines.push_back(printf_string("Q ≈ %.4f ± %.4f (%s); Fano %.4f; Poisson chi2 p = %.3g", num(c, "mandel_q"),
                                      num(c, "mandel_q_standard_error"), c.value("verdict", "?").c_str(), num(c, "fano"),
                                      num(c["poisson_chi2"], "p_value")));
      }
      break;
    }
    case ScenarioKind::kDecayFit: {
      lines.push_back(printf_string("best model: %s (ΔAIC = %.2f to the next)%s", s.value("best", "?").c_str(),
                                    num(s, "delta_aic"), s.value("indeterminate", false) ? "; indeterminate (flat data)" : ""));
      for (const auto& f : s["ranking"]) {
        std::string l = printf_string("  %s: AIC %.2f, I0 = %.4g, tau = %.4g", f.value("model", "?").c_str(), num(f, "aic"),
                                      num(f, "i0"), num(f, "tau"));
        if (f.contains("p")) l += printf_string(", p = %.4g", num(f, "p"));
        if (f.contains("m")) l += printf_string(", m = %.3g, omega = %.4g", num(f, "m"), num(f, "omega"));
        if (!f.value("converged", true)) l += " (not converged)";
        lines.push_back(l);
      }
      break;
    }
    case ScenarioKind::kTomoSim:
      lines.push_back(printf_string("scheme %s, %llu shots per setting, white-noise fraction %.4g", s.value("scheme", "?").c_str(),
                                    static_cast<unsigned long long>(s.value("shots_per_setting", 0)),
                                    num(s["noise"], "white_fraction")));
      if (s["noise"].contains("coincidences")) {
        const auto& c = s["noise"]["coincidences"];
        lines.push_back(printf_string("pair clicks: corrected coincidences %.6g (expected true pairs %.6g)", num(c, "corrected"),
                                      num(c, "expected_true")));
      }
      break;
    case ScenarioKind::kTomoFit:
    case ScenarioKind::kFullPipeline:
      tomography_lines(s, lines);
      break;
    case ScenarioKind::kBell:
      if (s.contains("given")) lines.push_back("given angles: " + bell_line(s["given"]));
      if (s.contains("optimized")) {
        const auto& a = s["optimized"]["angles_deg"];
        lines.push_back(bell_line(s["optimized"]) +
                        printf_string(" at a=%.2f° a'=%.2f° b=%.2f° b'=%.2f°", a[0].get<double>(), a[1].get<double>(),
                                      a[2].get<double>(), a[3].get<double>()));
      }
      lines.push_back(printf_string("concurrence C = %.4f", num(s, "concurrence")));
      break;
  }
  return lines;
}

}  // namespace detail

/// Throws ValidationError when the manifest or a listed artifact is missing or altered.
inline Report make_report(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const auto manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) throw ValidationError("missing artifact: " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path.string()));
  } catch (const json::parse_error& e) {
    throw FormatError("manifest is not valid JSON: " + std::string(e.what()), 0);
  }
  const auto kind = scenario_kind_from_string(manifest.value("scenario", ""));
  Report r;
  r.data = {{"scenario", to_string(kind)}, {"status", manifest.value("status", "?")}, {"run", dir.string()}};
  r.lines.push_back(to_string(kind) + " run, " + manifest.value("status", "?") + ", config sha256 " +
                    manifest.value("config_sha256", "?").substr(0, 12));
  if (manifest.value("status", "") != "ok") {
    const auto& f = manifest["failure"];
    r.lines.push_back("run failed (exit " + std::to_string(f.value("exit_code", 0)) + ", " + f.value("kind", "?") +
                      "): " + f.value("reason", ""));
    r.data["failure"] = f;
    r.data["lines"] = r.lines;
    return r;
  }
  for (const auto& a : manifest["artifacts"]) {
    const auto p = dir / a.value("name", "");
    if (!fs::exists(p)) throw ValidationError("missing artifact: " + p.string());
    if (sha256_hex(read_file(p.string())) != a.value("sha256", ""))
      throw ValidationError("artifact changed since the run: " + p.string());
  }
  const auto summary_path = dir / "summary.json";
  if (!fs::exists(summary_path)) throw ValidationError("missing artifact: " + summary_path.string());
  const auto summary = json::parse(read_file(summary_path.string()));
  for (auto& l : detail::summary_lines(kind, summary)) r.lines.push_back(std::move(l));
  r.data["lines"] = r.lines;
  r.data["summary"] = summary;
  return r;
}

// ----------------------------------------------------------------- ingest

struct IngestOptions {
  std::optional<double> window;     // counting window; default duration/1000
  double bin_width = 1e-6;          // g2
  double max_lag = 1e-5;
};

/// Key numbers of a click stream; estimators whose preconditions fail are
/// reported as skipped with the reason.
inline json ingest_summary(const photon::ClickStream& s, const IngestOptions& opt = {}) {
  json out = detail::stream_summary(s);
  for (auto id : s.detector_ids()) {
    auto& d = out["detectors"][std::to_string(id)];
    try {
      const auto w = photon::waiting_times(s, id);
      d["waiting_times"] = {{"rate", w.rate}, {"ks_distance", w.ks_distance}, {"ks_p_value", w.ks_p_value},
                            {"exponential", w.exponential}};
    } catch (const ValidationError& e) {
      d["waiting_times"] = std::string("skipped: ") + e.what();
    }
  }
  if (s.duration > 0.0) {
    try {
      const auto c = photon::counting_stats(s, opt.window.value_or(s.duration / 1000.0));
      out["counting"] = {{"window_s", c.window}, {"mean", c.mean}, {"fano", c.fano}, {"mandel_q", c.mandel_q},
                         {"mandel_q_standard_error", c.mandel_q_stderr}, {"poisson_chi2", {{"p_value", c.poisson_chi2.p_value}}},
                         {"verdict", detail::q_verdict(c.mandel_q, c.mandel_q_stderr)}};
    } catch (const ValidationError& e) {
      out["counting"] = std::string("skipped: ") + e.what();
    }
  }
  try {
    const auto g = photon::g2(s, {opt.bin_width, opt.max_lag, 0, 1});
    out["g2"] = {{"bin_width_s", g.bin_width}, {"zero_lag", g.at_zero()}, {"zero_lag_standard_error", g.stderr_at_zero()},
                 {"verdict", detail::g2_verdict(g.at_zero(), g.stderr_at_zero())}};
  } catch (const ValidationError& e) {
    out["g2"] = std::string("skipped: ") + e.what();
  }
  return out;
}

inline std::vector<std::string> ingest_lines(const json& s) {
  auto lines = detail::summary_lines(ScenarioKind::kClicks, s);
  for (const char* key : {"counting", "g2"})
    if (s.contains(key) && s[key].is_string()) lines.push_back(std::string(key) + ": " + s[key].get<std::string>());
  return lines;
}

}  // namespace einsel::harness
