#pragma once

#include <iosfwd>
#include <string>
#include <vector>

// Minimal RFC-4180 reader/writer for the tidy outputs of the CLI.
namespace evtol::csv {

using Row = std::vector<std::string>;

std::vector<Row> read(std::istream& in);
std::string escape(const std::string& field);
std::string join(const Row& row);
void write_row(std::ostream& out, const Row& row);

// Shortest round-trip decimal representation; keeps CSV output reproducible.
std::string number(double v);

}  // namespace evtol::csv
