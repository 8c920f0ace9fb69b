#include "mbe/matrix_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mbe/errors.hpp"

namespace mbe {

namespace {

constexpr char kMagic[4] = {'M', 'B', 'E', 'M'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw format_error("truncated matrix header");
  return value;
}

double parse_field(const char* first, const char* last, Index row, Index col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw format_error("unparsable csv field at row " + std::to_string(row) + ", col " +
                       std::to_string(col));
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw numeric_error("double formatting failed");
  return std::string(buf, ptr);
}

Eigen::MatrixXd read_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  Index rows = 0;
  Index cols = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    Index c = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::size_t end = (comma == std::string::npos) ? line.size() : comma;
      values.push_back(parse_field(line.data() + pos, line.data() + end, rows, c));
      ++c;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) {
      cols = c;
    } else if (c != cols) {
      throw format_error("ragged csv: row " + std::to_string(rows) + " has " + std::to_string(c) +
                         " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0 || cols <= 0) throw data_error("empty matrix");
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  return m;
}

void write_csv(const Eigen::MatrixXd& m, std::ostream& out) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out.put(',');
      out << format_double(m(r, c));
    }
    out.put('\n');
  }
}

}  // namespace

Eigen::MatrixXd read_matrix_stream(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw format_error("bad magic, not a matrix file");
  const auto version = get<std::uint16_t>(in);
  if (version != kVersion) throw format_error("unsupported matrix version " + std::to_string(version));
  const auto dtype = get<std::uint8_t>(in);
  if (dtype > 1) throw format_error("unknown dtype " + std::to_string(dtype));
  get<std::uint8_t>(in);  // reserved
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows == 0 || cols == 0) throw data_error("empty matrix");

  const Index n_rows = static_cast<Index>(rows);
  const Index n_cols = static_cast<Index>(cols);
  Eigen::MatrixXd m(n_rows, n_cols);
  if (dtype == static_cast<std::uint8_t>(MatrixDtype::f64)) {
    std::vector<double> row(cols);
    for (Index r = 0; r < n_rows; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * sizeof(double)));
      if (!in) throw format_error("truncated matrix payload");
      for (Index c = 0; c < n_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
  } else {
    std::vector<float> row(cols);
    for (Index r = 0; r < n_rows; ++r) {
      in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(cols * sizeof(float)));
      if (!in) throw format_error("truncated matrix payload");
      for (Index c = 0; c < n_cols; ++c) m(r, c) = static_cast<double>(row[static_cast<std::size_t>(c)]);
    }
  }
  return m;
}

void write_matrix_stream(const Eigen::MatrixXd& m, std::ostream& out, MatrixDtype dtype) {
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint8_t>(dtype));
  put(out, std::uint8_t{0});
  put(out, static_cast<std::uint64_t>(m.rows()));
  put(out, static_cast<std::uint64_t>(m.cols()));
  if (dtype == MatrixDtype::f64) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  } else {
    std::vector<float> row(static_cast<std::size_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = static_cast<float>(m(r, c));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }
}

TimeSeriesMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  TimeSeriesMatrix m;
  m.data = (format == MatrixFormat::binary) ? read_matrix_stream(in) : read_csv(in);
  if (!m.data.allFinite()) throw data_error("non-finite values in " + path.string());
  return m;
}

void write_matrix(const TimeSeriesMatrix& m, const std::filesystem::path& path, MatrixFormat format,
                  MatrixDtype dtype) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  if (format == MatrixFormat::binary) {
    write_matrix_stream(m.data, out, dtype);
  } else {
    write_csv(m.data, out);
  }
  out.flush();
  if (!out) throw io_error("write failed for " + path.string());
}

MatrixFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? MatrixFormat::csv : MatrixFormat::binary;
}

}  // namespace mbe
