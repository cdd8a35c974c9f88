#pragma once

// Serialization shared by the harness: full-precision CSV, SHA-256 digests,
// CountTable and TomographyResult JSON.

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "einsel/tomo/reconstruct.hpp"

namespace einsel::harness {

using json = nlohmann::ordered_json;

/// Shortest text with 17 significant digits; the same bytes on every run.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> r{cell(cells)...};
    if (r.size() != columns_) throw std::logic_error("csv row width mismatch");
    row_strings(r);
  }

  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "1" : "0"; }
  template <typename I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }

  void row_strings(const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out_ << ',';
      const bool quote = r[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out_ << r[i];
        continue;
      }
      out_ << '"';
      for (char c : r[i]) out_ << (c == '"' ? "\"\"" : std::string(1, c));
      out_ << '"';
    }
    out_ << '\n';
  }

  std::size_t columns_;
  std::ostringstream out_;
};

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'", 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ------------------------------------------------------------------ matrices

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

/// Accepts rows of [re, im] pairs or of plain reals.
inline CMatrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ValidationError(what + ": matrix must be square");
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& e = row[static_cast<std::size_t>(k)];
      if (e.is_number()) {
        m(i, k) = e.get<double>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ValidationError(what + ": entries must be numbers or [re, im] pairs");
      }
    }
  }
  return m;
}

// --------------------------------------------------------------- count tables

inline json count_value(double c) {
  if (c == std::floor(c) && std::abs(c) < 9e15) return static_cast<long long>(c);
  return c;
}

/// {scheme, shots_per_setting, counts: {setting label: {outcome label: n}}}
inline json count_table_to_json(const tomo::CountTable& t) {
  const auto& s = t.measurement();
  json counts = json::object();
  for (std::size_t i = 0; i < s.cells().size(); ++i) {
    const auto& c = s.cells()[i];
    counts[s.setting_label(c.setting)][s.outcome_label(c)] = count_value(t.counts[i]);
  }
  return {{"scheme", tomo::to_string(t.scheme)}, {"shots_per_setting", count_value(t.shots_per_setting)}, {"counts", counts}};
}

inline tomo::CountTable count_table_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("count table must be a JSON object");
  for (const char* key : {"scheme", "shots_per_setting", "counts"})
    if (!j.contains(key)) throw ValidationError(std::string("count table misses '") + key + "'");
  if (!j["scheme"].is_string()) throw ValidationError("count table 'scheme' must be a string");
  if (!j["shots_per_setting"].is_number()) throw ValidationError("count table 'shots_per_setting' must be a number");
  tomo::CountTable t;
  t.scheme = tomo::scheme_kind_from_string(j["scheme"].get<std::string>());
  t.shots_per_setting = j["shots_per_setting"].get<double>();
  const auto& s = t.measurement();
  const auto& counts = j["counts"];
  if (!counts.is_object() || counts.size() != s.joint_settings())
    throw ValidationError("count table needs " + std::to_string(s.joint_settings()) + " settings");
  t.counts.resize(s.cells().size());
  for (std::size_t i = 0; i < s.cells().size(); ++i) {
    const auto& c = s.cells()[i];
    const auto setting = s.setting_label(c.setting), outcome = s.outcome_label(c);
    if (!counts.contains(setting)) throw ValidationError("count table misses setting '" + setting + "'");
    const auto& row = counts[setting];
    if (!row.is_object() || row.size() != s.outcomes_per_setting())
      throw ValidationError("setting '" + setting + "' needs " + std::to_string(s.outcomes_per_setting()) + " outcomes");
    if (!row.contains(outcome) || !row[outcome].is_number())
      throw ValidationError("setting '" + setting + "' misses numeric outcome '" + outcome + "'");
    t.counts[i] = row[outcome].get<double>();
  }
  t.validate();
  return t;
}

inline json result_to_json(const tomo::TomographyResult& r) {
  return {{"method", tomo::to_string(r.method)},
          {"physical", r.physical},
          {"converged", r.converged},
          {"iterations", r.iterations},
          {"log_likelihood", r.log_likelihood},
          {"residual", r.residual},
          {"diagnostics", r.diagnostics},
          {"rho", matrix_to_json(r.rho.matrix())}};
}

}  // namespace einsel::harness
