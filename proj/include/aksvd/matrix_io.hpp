#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aksvd/matrix.hpp"

namespace aksvd {

/// Shortest text that parses back to exactly `v` (at most 17 significant
/// digits, '.' as decimal point regardless of locale).
std::string format_double(double v);

/// Headerless CSV, one matrix row per line.
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& a);
DenseMatrix read_matrix_csv(const std::filesystem::path& path);

/// One value per line.
void write_vector_csv(const std::filesystem::path& path, const std::vector<double>& v);
std::vector<double> read_vector_csv(const std::filesystem::path& path);

/// Locale-independent parse of a whole token; throws ParseError otherwise.
double parse_double(std::string_view token, const std::string& where);

}  // namespace aksvd
