#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sepnmf/matrix.hpp"

namespace sepnmf::io {

// 17 significant digits ("%.17g"); parses back to the identical double.
std::string format_double(double v);

// One matrix row per line, comma-separated, no header, LF endings.
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);

// Throws Parse on ragged rows, empty input or non-numeric fields, and
// NonFinite on nan/inf.
DenseMatrix read_matrix_csv(std::istream& in);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

// One 1-based index per line.
void write_anchors(const std::filesystem::path& path, const IndexList& anchors);
IndexList read_anchors(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sepnmf::io
