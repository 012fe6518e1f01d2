#include "robust_unmix/io.hpp"

#include "robust_unmix/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace robust_unmix::io {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return out;
  }
}

double parse_number(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) throw ParseError("empty field", line);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError("cannot parse number '" + std::string(token) + "'", line);
  }
  return value;
}

long parse_count(const Metadata& meta, const std::string& key, const fs::path& where) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("descriptor " + where.string() + " lacks '" + key + "'", 0);
  long value = -1;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    throw ParseError("descriptor key '" + key + "' is not a count", 0);
  }
  return value;
}

Matrix load_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      values.push_back(parse_number(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start), line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      throw ShapeMismatch("line " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("no data rows in " + path.string(), line_no);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

Matrix load_raw(const fs::path& path) {
  const fs::path header = sidecar_path(path);
  if (!fs::exists(header)) throw IoError("missing descriptor " + header.string());
  const Metadata meta = read_key_values(header);
  const auto dtype = meta.find("dtype");
  const auto layout = meta.find("layout");
  if (dtype == meta.end() || dtype->second != "f64le") throw UnsupportedFormat("descriptor dtype must be f64le");
  if (layout == meta.end() || layout->second != "row_major") throw UnsupportedFormat("descriptor layout must be row_major");
  const long rows = parse_count(meta, "rows", header);
  const long cols = parse_count(meta, "cols", header);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto expected = static_cast<std::uintmax_t>(rows) * static_cast<std::uintmax_t>(cols) * 8u;
  const auto actual = fs::file_size(path);
  if (actual != expected) {
    throw ShapeMismatch("declared " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                        std::to_string(expected) + " bytes, file has " + std::to_string(actual));
  }
  Matrix m(rows, cols);
  std::array<char, 8> buf{};
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      in.read(buf.data(), 8);
      if (!in) throw IoError("short read in " + path.string());
      m(i, j) = std::bit_cast<double>(to_little_endian(std::bit_cast<std::uint64_t>(buf)));
    }
  }
  return m;
}

}  // namespace

Format format_from_path(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".csv") return Format::Csv;
  if (ext == ".f64" || ext == ".raw" || ext == ".bin") return Format::RawF64;
  throw UnsupportedFormat("cannot infer matrix format from '" + path.string() + "'");
}

Format parse_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "csv") return Format::Csv;
  if (n == "rawf64" || n == "f64") return Format::RawF64;
  throw UnsupportedFormat("unknown matrix format '" + name + "'");
}

std::string file_extension(Format format) { return format == Format::Csv ? ".csv" : ".f64"; }

fs::path sidecar_path(const fs::path& path) {
  fs::path out = path;
  out += ".hdr";
  return out;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  return std::string(buf.data(), ptr);
}

std::string format_shortest(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

Metadata read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Metadata out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    out[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
  }
  return out;
}

void write_key_values(const fs::path& path, const Metadata& values) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [key, value] : values) out << key << '=' << value << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix load_matrix(const fs::path& path, Format format) {
  return format == Format::Csv ? load_csv(path) : load_raw(path);
}

Matrix load_matrix(const fs::path& path) { return load_matrix(path, format_from_path(path)); }

void save_matrix(const Matrix& matrix, const fs::path& path, Format format, const Metadata& extra) {
  if (format == Format::Csv) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [key, value] : extra) out << "# " << key << '=' << value << '\n';
    std::string line;
    for (Index i = 0; i < matrix.rows(); ++i) {
      line.clear();
      for (Index j = 0; j < matrix.cols(); ++j) {
        if (j > 0) line += ',';
        line += format_double(matrix(i, j));
      }
      out << line << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
    return;
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (Index i = 0; i < matrix.rows(); ++i) {
    for (Index j = 0; j < matrix.cols(); ++j) {
      const auto bytes = std::bit_cast<std::array<char, 8>>(to_little_endian(std::bit_cast<std::uint64_t>(matrix(i, j))));
      out.write(bytes.data(), 8);
    }
  }
  if (!out) throw IoError("write failed for " + path.string());

  std::ofstream header(sidecar_path(path));
  if (!header) throw IoError("cannot write " + sidecar_path(path).string());
  header << "rows=" << matrix.rows() << "\ncols=" << matrix.cols() << "\ndtype=f64le\nlayout=row_major\n";
  for (const auto& [key, value] : extra) {
    if (key == "rows" || key == "cols" || key == "dtype" || key == "layout") continue;
    header << key << '=' << value << '\n';
  }
  if (!header) throw IoError("write failed for " + sidecar_path(path).string());
}

void save_matrix(const Matrix& matrix, const fs::path& path) { save_matrix(matrix, path, format_from_path(path)); }

}  // namespace robust_unmix::io
