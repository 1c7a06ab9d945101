#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qfu/angle.hpp"
#include "qfu/common.hpp"

namespace qfu {

// A measurement pattern on an n-row, m-column grid graph. Nodes are indexed
// column-major (index = col * n + row), which is also the measurement order.
// x_deps / z_deps hold, per node, the earlier nodes whose corrected outcomes
// feed the X / Z adaptation of its angle.
struct MeasurementPattern {
  int n = 0, m = 0;
  std::vector<AngleOctant> phi;              // per node, column-major
  std::vector<std::vector<int>> x_deps;      // per node, node indices
  std::vector<std::vector<int>> z_deps;      // per node, node indices
  std::vector<std::pair<int, int>> edges;    // CZ edges, node indices, a < b

  int index(int row, int col) const { return col * n + row; }
  int row_of(int v) const { return v % n; }
  int col_of(int v) const { return v / n; }
  int size() const { return n * m; }

  // Dependency sets may only reference earlier nodes in measurement order.
  void validate() const;

  std::string to_json() const;
  static MeasurementPattern from_json(const std::string& text);
};

// The brickwork edge set: horizontal chains plus the brick verticals
// (1-based column J: rows (i, i+1) with i odd at J == 3 mod 8, i even at
// J == 7 mod 8; each brick repeats its vertical two columns later).
std::vector<std::pair<int, int>> brickwork_edges(int n, int m);

// Brickwork pattern with the canonical flow dependencies: X-dep is the row
// predecessor; Z-deps of v are the nodes u != v with v adjacent to u's flow
// image (u's row successor). phi is given row-major ([row][col]).
MeasurementPattern build_brickwork(int n, int m,
                                   const std::vector<std::vector<AngleOctant>>& phi);

}  // namespace qfu
