#pragma once

#include <filesystem>
#include <iosfwd>

#include "mbe/time_series.hpp"

namespace mbe {

enum class MatrixFormat { binary, csv };
enum class MatrixDtype : unsigned char { f32 = 0, f64 = 1 };

// Binary layout: magic "MBEM", version u16 = 1, dtype u8 (0 = f32, 1 = f64),
// reserved u8 = 0, rows u64, cols u64, then the row-major little-endian
// payload. CSV: comma separated, no header, '.' decimal point.

TimeSeriesMatrix read_matrix(const std::filesystem::path& path, MatrixFormat format);
void write_matrix(const TimeSeriesMatrix& m, const std::filesystem::path& path, MatrixFormat format,
                  MatrixDtype dtype = MatrixDtype::f64);

// Stream variants used by the container format.
Eigen::MatrixXd read_matrix_stream(std::istream& in);
void write_matrix_stream(const Eigen::MatrixXd& m, std::ostream& out,
                         MatrixDtype dtype = MatrixDtype::f64);

// ".csv" selects csv, anything else the binary format.
MatrixFormat format_from_extension(const std::filesystem::path& path);

}  // namespace mbe
