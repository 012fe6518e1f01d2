#pragma once

#include "robust_unmix/types.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace robust_unmix::io {

// Dense matrix files. Data matrices are stored bands x pixels.
//
// CSV: one matrix row per line, comma-separated, '.' decimal point, no
// header; blank lines and lines starting with '#' are ignored. Written with
// 17 significant digits, which round-trips every double.
//
// RAWF64: rows*cols little-endian IEEE-754 doubles in row-major order, with a
// text sidecar "<path>.hdr" of key=value lines:
//   rows=<int>
//   cols=<int>
//   dtype=f64le
//   layout=row_major
// followed by optional free-form keys (seed, generator settings, ...).

enum class Format { Csv, RawF64 };

/// ".csv" -> Csv; ".f64", ".raw", ".bin" -> RawF64; anything else throws UnsupportedFormat.
Format format_from_path(const std::filesystem::path& path);

/// Parses "csv" / "rawf64".
Format parse_format(const std::string& name);

std::string file_extension(Format format);

/// Sidecar descriptor path of a RAWF64 file.
std::filesystem::path sidecar_path(const std::filesystem::path& path);

using Metadata = std::map<std::string, std::string>;

Matrix load_matrix(const std::filesystem::path& path, Format format);
Matrix load_matrix(const std::filesystem::path& path);

/// Extra metadata goes to the RAWF64 sidecar, or as leading '#' comment lines in CSV.
void save_matrix(const Matrix& matrix, const std::filesystem::path& path, Format format, const Metadata& extra = {});
void save_matrix(const Matrix& matrix, const std::filesystem::path& path);

/// Reads a key=value text file ('#' comments and blank lines skipped).
Metadata read_key_values(const std::filesystem::path& path);
void write_key_values(const std::filesystem::path& path, const Metadata& values);

/// Formats a double with 17 significant digits.
std::string format_double(double value);

/// Shortest decimal form that still parses back to the same double.
std::string format_shortest(double value);

}  // namespace robust_unmix::io
