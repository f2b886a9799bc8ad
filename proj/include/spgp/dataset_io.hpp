#pragma once

#include <istream>
#include <string>
#include <vector>

#include "spgp/core.hpp"

namespace spgp {

/// Per-column affine map x -> (x - mean) / scale applied to the inputs.
struct Standardization {
  bool applied = false;
  Vector mean;
  Vector scale;

  static Standardization identity(Index p);
  /// Column means and sample standard deviations of `x`; constant columns keep scale 1.
  static Standardization fit(const Eigen::Ref<const Matrix>& x);
  Matrix apply(const Eigen::Ref<const Matrix>& x) const;
};

struct LoadedDataset {
  Dataset data;
  Standardization transform;
  std::vector<std::string> columns;  // input column names, x1..xp
};

/// Parses a CSV with header `x1,...,xp,y`. Errors carry the 1-based line number.
LoadedDataset parse_csv_dataset(std::istream& in, bool standardize, const std::string& source = "<stream>");

LoadedDataset read_csv_dataset(const std::string& path, bool standardize);

void write_csv_dataset(const std::string& path, const Eigen::Ref<const Matrix>& x,
                       const Eigen::Ref<const Vector>& y);

/// Shortest round-trip decimal form of v.
std::string format_double(double v);

}  // namespace spgp
