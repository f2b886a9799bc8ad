#include "spgp/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spgp/errors.hpp"
#include "spgp/report.hpp"

namespace spgp {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string at_line(const std::string& source, long line) {
  return source + ":" + std::to_string(line) + ": ";
}

}  // namespace

Standardization Standardization::identity(Index p) {
  return {false, Vector::Zero(p), Vector::Ones(p)};
}

Standardization Standardization::fit(const Eigen::Ref<const Matrix>& x) {
  Standardization t{true, x.colwise().mean().transpose(), Vector::Ones(x.cols())};
  if (x.rows() < 2) return t;
  for (Index m = 0; m < x.cols(); ++m) {
    const double ss = (x.col(m).array() - t.mean(m)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(x.rows() - 1));
    if (sd > 0.0 && std::isfinite(sd)) t.scale(m) = sd;
  }
  return t;
}

Matrix Standardization::apply(const Eigen::Ref<const Matrix>& x) const {
  if (x.cols() != mean.size()) throw DimensionError("standardization: column count differs");
  if (!applied) return x;
  Matrix out = x.rowwise() - mean.transpose();
  return out.array().rowwise() / scale.transpose().array();
}

LoadedDataset parse_csv_dataset(std::istream& in, bool standardize, const std::string& source) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw ValidationError(source + ": empty file, expected header x1,...,xp,y");
  if (header.back() != "y") throw ValidationError(at_line(source, line_no) + "header is missing column 'y'");
  const auto p = static_cast<Index>(header.size()) - 1;
  if (p < 1) throw ValidationError(at_line(source, line_no) + "header needs at least one input column x1");
  for (Index m = 0; m < p; ++m) {
    const std::string want = "x" + std::to_string(m + 1);
    if (header[static_cast<std::size_t>(m)] != want) {
      throw ValidationError(at_line(source, line_no) + "expected column '" + want + "', found '" +
                            header[static_cast<std::size_t>(m)] + "'");
    }
  }

  std::vector<double> values;
  Index n = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<Index>(fields.size()) != p + 1) {
      throw ValidationError(at_line(source, line_no) + "expected " + std::to_string(p + 1) +
                            " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string& f = fields[k];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
        throw ValidationError(at_line(source, line_no) + "field " + std::to_string(k + 1) +
                              " is not a number: '" + f + "'");
      }
      if (!std::isfinite(v)) {
        throw ValidationError(at_line(source, line_no) + "field " + std::to_string(k + 1) + " is not finite");
      }
      values.push_back(v);
    }
    ++n;
  }
  if (in.bad()) throw IoError(source + ": read failed");
  if (n < 2) throw ValidationError(source + ": need at least 2 data rows, found " + std::to_string(n));

  Matrix x(n, p);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index m = 0; m < p; ++m) x(i, m) = values[static_cast<std::size_t>(i * (p + 1) + m)];
    y(i) = values[static_cast<std::size_t>(i * (p + 1) + p)];
  }
  Standardization t = standardize ? Standardization::fit(x) : Standardization::identity(p);
  if (t.applied) x = t.apply(x);
  header.pop_back();
  return {Dataset(std::move(x), std::move(y)), std::move(t), std::move(header)};
}

LoadedDataset read_csv_dataset(const std::string& path, bool standardize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_csv_dataset(in, standardize, path);
}

void write_csv_dataset(const std::string& path, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Vector>& y) {
  if (x.rows() != y.size()) throw DimensionError("write_csv_dataset: X rows and y length differ");
  std::ostringstream out;
  for (Index m = 0; m < x.cols(); ++m) out << 'x' << (m + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index m = 0; m < x.cols(); ++m) out << format_double(x(i, m)) << ',';
    out << format_double(y(i)) << '\n';
  }
  write_file_atomic(path, out.str());
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ValidationError("format_double: conversion failed");
  return std::string(buf, ptr);
}

}  // namespace spgp
