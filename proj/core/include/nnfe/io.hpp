#pragma once

// Plain-text ingestion and emission: CSV samples (comma-separated reals,
// optional header row detected by a non-numeric first line, '#' comment
// lines ignored) and key=value config files. Numbers are written with
// enough digits to round-trip exactly.

#include <map>
#include <ostream>
#include <string>

#include "nnfe/sample.hpp"

namespace nnfe {

// Throws ParseError with the offending path or line number.
Sample read_sample_csv(const std::string& path);

void write_sample_csv(std::ostream& out, const Sample& sample, bool header = true);

// key = value per line, '#' starts a comment, blank lines ignored.
// Duplicate keys are an error.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

// 17 significant digits, enough to parse back to the identical double.
std::string format_full(double x);

}  // namespace nnfe
