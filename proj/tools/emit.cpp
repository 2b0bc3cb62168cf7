#include "emit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qgrm/errors.hpp"

namespace qgrm::cli {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char ch : text) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

std::string csv_cell(const Json& cell) {
  switch (cell.type()) {
    case Json::value_t::null:
      return "";
    case Json::value_t::boolean:
      return cell.get<bool>() ? "true" : "false";
    case Json::value_t::number_integer:
      return std::to_string(cell.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return std::to_string(cell.get<std::uint64_t>());
    case Json::value_t::number_float:
      return format_real(cell.get<double>());
    case Json::value_t::string:
      return csv_field(cell.get<std::string>());
    default:
      return csv_field(cell.dump());
  }
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << csv_field(table.columns[c]);
  out << "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << "\r\n";
  }
}

Json table_to_json(const Table& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = c < row.size() ? row[c] : Json();
    rows.push_back(std::move(obj));
  }
  return rows;
}

void write_json(std::ostream& out, const Table& table, const Json& config, const Json& extra) {
  Json doc = Json::object();
  doc["config"] = config;
  doc["results"] = table_to_json(table);
  doc["extra"] = extra;
  out << doc.dump(2) << "\n";
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << text;
  file.flush();
  if (!file) throw IoError("failed writing " + path);
}

void emit(const Table& table, const Json& config, const Json& extra, const std::string& format,
          const std::string& path, std::ostream& stdout_stream) {
  std::ostringstream text;
  if (format == "json")
    write_json(text, table, config, extra);
  else
    write_csv(text, table);
  if (path.empty())
    stdout_stream << text.str();
  else
    write_file(path, text.str());
}

}  // namespace qgrm::cli
