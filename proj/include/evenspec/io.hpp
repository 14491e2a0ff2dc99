#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "evenspec/oracle.hpp"

namespace evenspec {

/// %.17g, so every double survives a text round trip; zero of either sign
/// prints as 0.
std::string format_double(double v);

/// JSON text with all numbers printed at 17 significant digits and object
/// keys in sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Row-major, one matrix row per line, entries as "re,im" pairs.
void write_matrix_csv(const CMatrix& M, std::ostream& out);
/// Row-major 16-byte little-endian complex doubles, no header.
void write_matrix_binary(const CMatrix& M, const std::string& path);
/// Reads a square matrix written by write_matrix_binary.
CMatrix read_matrix_binary(const std::string& path);

/// Columns index,re,im,confidence,reliable; unmatched eigenvalues use index -1.
void write_spectrum_csv(const MatchedSpectrum& ms, std::ostream& out);

void write_text_file(const std::string& path, const std::string& content);

} // namespace evenspec
