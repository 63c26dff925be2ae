#pragma once

// Verification reports and their deterministic JSON / CSV serialisation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wisq/error.hpp"

namespace wisq::harness {

struct Criterion {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation = "<=";  // value <relation> limit
  bool pass = false;

  bool operator==(const Criterion&) const = default;
};

enum class Status { pass, fail, refused };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    case Status::refused:
      return "refused";
  }
  return "?";
}

inline Status status_from_string(const std::string& s) {
  if (s == "pass") return Status::pass;
  if (s == "fail") return Status::fail;
  if (s == "refused") return Status::refused;
  throw InvalidArgument("unknown report status: " + s);
}

struct VerificationReport {
  std::string suite;
  Status status = Status::fail;
  std::string message;
  std::string config_hash;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Criterion> criteria;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool passed() const { return status == Status::pass; }

  void metric(const std::string& name, double v) { metrics.emplace_back(name, v); }

  /// Records a criterion; `relation` is "<=" or ">=".
  bool check(const std::string& name, double value, const std::string& relation, double limit) {
    const bool ok = relation == "<=" ? value <= limit : value >= limit;
    criteria.push_back({name, value, limit, relation, ok});
    return ok;
  }

  /// Boolean criterion stored as value 1 (true) against limit 1.
  bool check(const std::string& name, bool ok) {
    criteria.push_back({name, ok ? 1.0 : 0.0, 1.0, ">=", ok});
    return ok;
  }

  /// pass iff at least one criterion was recorded and all hold.
  void finalize() {
    if (status == Status::refused) return;
    bool ok = !criteria.empty();
    for (const auto& c : criteria) ok = ok && c.pass;
    status = ok ? Status::pass : Status::fail;
  }

  bool operator==(const VerificationReport&) const = default;
};

namespace detail {

// JSON has no infinities; they travel as strings.
inline nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double number_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw InvalidArgument("not a number: " + s);
}

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const VerificationReport& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["config_hash"] = r.config_hash;
  j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.seeds) j["seeds"][k] = v;
  j["notes"] = r.notes;
  j["metrics"] = nlohmann::ordered_json::array();
  for (const auto& [k, v] : r.metrics) j["metrics"].push_back({{"name", k}, {"value", detail::number(v)}});
  j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : r.criteria) {
    j["criteria"].push_back({{"name", c.name},
                             {"value", detail::number(c.value)},
                             {"relation", c.relation},
                             {"limit", detail::number(c.limit)},
                             {"pass", c.pass}});
  }
  j["columns"] = r.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (double v : row) jr.push_back(detail::number(v));
    j["rows"].push_back(jr);
  }
  return j;
}

inline VerificationReport report_from_json(const nlohmann::json& j) {
  VerificationReport r;
  r.suite = j.at("suite").get<std::string>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.message = j.at("message").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& [k, v] : j.at("seeds").items()) r.seeds.emplace_back(k, v.get<std::uint64_t>());
  r.notes = j.at("notes").get<std::vector<std::string>>();
  for (const auto& m : j.at("metrics")) r.metrics.emplace_back(m.at("name").get<std::string>(), detail::number_from(m.at("value")));
  for (const auto& c : j.at("criteria")) {
    r.criteria.push_back({c.at("name").get<std::string>(), detail::number_from(c.at("value")), detail::number_from(c.at("limit")),
                          c.at("relation").get<std::string>(), c.at("pass").get<bool>()});
  }
  r.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    std::vector<double> v;
    for (const auto& x : row) v.push_back(detail::number_from(x));
    r.rows.push_back(std::move(v));
  }
  return r;
}

inline std::string report_to_csv(const VerificationReport& r) {
  std::ostringstream out;
  out << "kind,name,value,relation,limit,pass\n";
  out << "status," << detail::csv_quote(r.suite) << ',' << to_string(r.status) << ",,,\n";
  out << "config_hash,," << r.config_hash << ",,,\n";
  for (const auto& [k, v] : r.seeds) out << "seed," << detail::csv_quote(k) << ',' << v << ",,,\n";
  for (const auto& [k, v] : r.metrics) out << "metric," << detail::csv_quote(k) << ',' << detail::csv_number(v) << ",,,\n";
  for (const auto& c : r.criteria) {
    out << "criterion," << detail::csv_quote(c.name) << ',' << detail::csv_number(c.value) << ',' << c.relation << ','
        << detail::csv_number(c.limit) << ',' << (c.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

inline std::string table_to_csv(const VerificationReport& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << detail::csv_quote(r.columns[i]);
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_number(row[i]);
    out << '\n';
  }
  return out.str();
}

enum class Format { json, csv };

inline Format format_from_string(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw InvalidArgument("unknown report format: " + s);
}

/// Writes the report to `path`. CSV output also writes the per-row table next to it as <stem>_rows.csv.
inline void emit_report(const VerificationReport& r, Format format, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write report to " + p.string());
    out << text;
    if (!out) throw Error("failed writing report to " + p.string());
  };
  if (format == Format::json) {
    write(path, report_to_json(r).dump(2) + "\n");
  } else {
    write(path, report_to_csv(r));
    auto rows = path;
    rows.replace_filename(path.stem().string() + "_rows.csv");
    write(rows, table_to_csv(r));
  }
}

}  // namespace wisq::harness
