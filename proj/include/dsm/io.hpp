#pragma once

// CSV / JSON emission and CSV parsing for sweep results.
// CSV: header row, numbers as %.12g, '.' decimal separator, '\n' endings.

#include <dsm/errors.hpp>
#include <dsm/sweep.hpp>

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dsm {

enum class Format { Csv, Json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("format must be csv or json, got '" + std::string(s) + "'");
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

inline std::string csv_field(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size()) return v;
  return s;
}

inline std::string hex64(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

inline void emit_csv(const SweepResult& r, std::ostream& out) {
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << detail::csv_field(r.columns[i]);
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_field(row[i]);
    out << '\n';
  }
}

inline std::string to_csv(const SweepResult& r) {
  std::ostringstream s;
  emit_csv(r, s);
  return s.str();
}

inline nlohmann::ordered_json to_json_value(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["provenance"] = {{"tool", r.provenance.tool},
                     {"version", r.provenance.version},
                     {"config_hash", detail::hex64(r.provenance.config_hash)},
                     {"config", r.provenance.config}};
  j["columns"] = r.columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const auto* d = std::get_if<double>(&row[i]))
        o[r.columns[i]] = *d;  // non-finite values become null
      else
        o[r.columns[i]] = std::get<std::string>(row[i]);
    }
    j["rows"].push_back(std::move(o));
  }
  return j;
}

inline void emit_json(const SweepResult& r, std::ostream& out) { out << to_json_value(r).dump(2) << '\n'; }

inline void emit(const SweepResult& r, Format f, std::ostream& out) {
  if (f == Format::Csv)
    emit_csv(r, out);
  else
    emit_json(r, out);
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

inline void emit_file(const SweepResult& r, Format f, const std::string& path) {
  std::ostringstream s;
  emit(r, f, s);
  write_file(path, s.str());
}

/// Parse CSV as written by emit_csv (quoted fields allowed). Cells that read
/// fully as numbers become doubles.
inline SweepResult parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n') {
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else if (ch != '\r') {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw IoError("CSV ends inside a quoted field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw IoError("CSV has no header");
  SweepResult r;
  r.columns = records.front();
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != r.columns.size())
      throw IoError("CSV row " + std::to_string(i + 1) + " has " + std::to_string(records[i].size()) +
                    " fields, header has " + std::to_string(r.columns.size()));
    std::vector<Cell> row;
    for (const auto& f : records[i]) row.push_back(detail::parse_cell(f));
    r.rows.push_back(std::move(row));
  }
  return r;
}

inline SweepResult read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_csv(ss.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace dsm
