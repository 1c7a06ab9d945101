#pragma once

#include <optional>
#include <vector>

#include "qfu/common.hpp"
#include "qfu/rng.hpp"
#include "qfu/state.hpp"

namespace qfu {

// Dense complex matrix, row-major, square. Used for density operators and
// Kraus blocks (which may be rectangular, see Mat below).
struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<cplx> v;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), v(r * c, cplx(0, 0)) {}

  cplx& at(size_t r, size_t c) { return v[r * cols + c]; }
  const cplx& at(size_t r, size_t c) const { return v[r * cols + c]; }

  static Mat identity(size_t n);
  Mat dagger() const;
  Mat operator*(const Mat& o) const;
  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  Mat scaled(cplx s) const;
  cplx trace() const;
  double max_abs_diff(const Mat& o) const;
};

// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
// Returns eigenvalues ascending; eigenvectors[i] is the column for value i.
struct HermEig {
  std::vector<double> values;
  std::vector<std::vector<cplx>> vectors;
};
HermEig herm_eig(const Mat& h);

class DensityMatrix {
 public:
  DensityMatrix() : m_(1, 1) { m_.at(0, 0) = cplx(1, 0); }
  explicit DensityMatrix(Mat m);

  static DensityMatrix from_pure(const PureState& s);
  static DensityMatrix maximally_mixed(size_t dim);
  // Ginibre-style random density matrix of the given dimension.
  static DensityMatrix random(size_t dim, Rng& rng);

  size_t dim() const { return m_.rows; }
  const Mat& mat() const { return m_; }
  Mat& mat() { return m_; }

  double trace_real() const;
  double purity() const;  // Tr(rho^2)
  // Checks Hermiticity (1e-9), positivity (min eig >= -1e-9), trace <= 1+1e-9.
  void validate() const;

 private:
  Mat m_;
};

// Tr(a b), asserted real within 1e-9.
double trace_overlap(const DensityMatrix& a, const DensityMatrix& b);

// Hilbert-Schmidt norm ||a - b||_HS.
double hs_distance(const DensityMatrix& a, const DensityMatrix& b);

// Trace distance (1/2)||a - b||_1.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// Both sides of Tr(ab) = 1/2[Tr(a^2) + Tr(b^2)] - 1/2 ||a-b||_HS^2.
std::pair<double, double> check_trace_identity(const DensityMatrix& a, const DensityMatrix& b);

// Classical description of a state: a density matrix, or the null (all-zero)
// matrix used as an abort marker.
struct ClassicalDescription {
  std::optional<DensityMatrix> matrix;  // nullopt encodes the null matrix

  static ClassicalDescription null() { return {}; }
  static ClassicalDescription of(DensityMatrix m) { return {std::move(m)}; }
  bool is_null() const { return !matrix.has_value(); }
};

// Samples the two-outcome POVM {E0 = desc, E1 = I - desc} on `state`;
// returns 0 with probability Tr(desc * state). A null description never
// fires E0.
int povm_accuracy(const ClassicalDescription& desc, const DensityMatrix& state, Rng& rng);

// argmax over omega of Tr(omega[i] * desc); ties broken toward the lowest
// index.
size_t round_to_set(const std::vector<ClassicalDescription>& omega,
                    const ClassicalDescription& desc);

}  // namespace qfu
