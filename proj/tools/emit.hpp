#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace qgrm::cli {

using Json = nlohmann::ordered_json;

// A result table; cells are JSON scalars (integer, real, string, bool or null).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

// %.17g, with nan/inf spelled out.
std::string format_real(double x);

// RFC 4180: quoted when it holds a comma, quote, CR or LF; quotes doubled.
std::string csv_field(const std::string& text);

std::string csv_cell(const Json& cell);

void write_csv(std::ostream& out, const Table& table);

// Array of row objects keyed by column name, in column order.
Json table_to_json(const Table& table);

// {config, results, extra} as indented JSON.
void write_json(std::ostream& out, const Table& table, const Json& config, const Json& extra);

// Writes the table to `path` (stdout when empty) in csv or json format.
// Throws IoError when the file cannot be written.
void emit(const Table& table, const Json& config, const Json& extra, const std::string& format,
          const std::string& path, std::ostream& stdout_stream);

// Writes text to a file, throwing IoError on failure.
void write_file(const std::string& path, const std::string& text);

}  // namespace qgrm::cli
