#include "qfu/density.hpp"

#include <algorithm>
#include <cmath>

namespace qfu {

Mat Mat::identity(size_t n) {
  Mat m(n, n);
  for (size_t i = 0; i < n; ++i) m.at(i, i) = cplx(1, 0);
  return m;
}

Mat Mat::dagger() const {
  Mat m(cols, rows);
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) m.at(c, r) = std::conj(at(r, c));
  return m;
}

Mat Mat::operator*(const Mat& o) const {
  if (cols != o.rows) throw Error(Err::DimMismatch, "Mat: product shape mismatch");
  Mat m(rows, o.cols);
  for (size_t r = 0; r < rows; ++r)
    for (size_t k = 0; k < cols; ++k) {
      cplx a = at(r, k);
      if (a == cplx(0, 0)) continue;
      for (size_t c = 0; c < o.cols; ++c) m.at(r, c) += a * o.at(k, c);
    }
  return m;
}

Mat Mat::operator+(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) throw Error(Err::DimMismatch, "Mat: sum shape mismatch");
  Mat m = *this;
  for (size_t i = 0; i < v.size(); ++i) m.v[i] += o.v[i];
  return m;
}

Mat Mat::operator-(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) throw Error(Err::DimMismatch, "Mat: diff shape mismatch");
  Mat m = *this;
  for (size_t i = 0; i < v.size(); ++i) m.v[i] -= o.v[i];
  return m;
}

Mat Mat::scaled(cplx s) const {
  Mat m = *this;
  for (cplx& x : m.v) x *= s;
  return m;
}

cplx Mat::trace() const {
  if (rows != cols) throw Error(Err::DimMismatch, "Mat: trace of non-square");
  cplx t(0, 0);
  for (size_t i = 0; i < rows; ++i) t += at(i, i);
  return t;
}

double Mat::max_abs_diff(const Mat& o) const {
  if (rows != o.rows || cols != o.cols) throw Error(Err::DimMismatch, "Mat: shape mismatch");
  double m = 0;
  for (size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i] - o.v[i]));
  return m;
}

HermEig herm_eig(const Mat& h) {
  if (h.rows != h.cols) throw Error(Err::DimMismatch, "herm_eig: non-square");
  const size_t n = h.rows;
  Mat a = h;
  Mat vecs = Mat::identity(n);
  // Cyclic complex Jacobi sweeps.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += std::norm(a.at(p, q));
    if (off < 1e-26) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        const cplx apq = a.at(p, q);
        const double m = std::abs(apq);
        if (m < 1e-150) continue;
        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        // Phase-align the pivot, then a real Jacobi rotation. The combined
        // update is A <- U^dag A U with U = diag(1, e^{-i phi}) * R(c, s).
        const double phi = std::arg(apq);
        const double zeta = (aqq - app) / (2 * m);
        const double t =
            (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1 + t * t);
        const double s = t * c;
        const cplx eip = std::polar(1.0, phi);
        const cplx eim = std::conj(eip);
        // Rows: row_p <- c*row_p - s*e^{i phi}*row_q ; row_q <- s*row_p + c*e^{i phi}*row_q.
        for (size_t k = 0; k < n; ++k) {
          cplx rp = a.at(p, k), rq = a.at(q, k);
          a.at(p, k) = c * rp - s * eip * rq;
          a.at(q, k) = s * rp + c * eip * rq;
        }
        // Columns: col_p <- c*col_p - s*e^{-i phi}*col_q ; col_q <- s*col_p + c*e^{-i phi}*col_q.
        for (size_t k = 0; k < n; ++k) {
          cplx cp = a.at(k, p), cq = a.at(k, q);
          a.at(k, p) = c * cp - s * eim * cq;
          a.at(k, q) = s * cp + c * eim * cq;
        }
        for (size_t k = 0; k < n; ++k) {
          cplx vp = vecs.at(k, p), vq = vecs.at(k, q);
          vecs.at(k, p) = c * vp - s * eim * vq;
          vecs.at(k, q) = s * vp + c * eim * vq;
        }
      }
    }
  }
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return a.at(x, x).real() < a.at(y, y).real(); });
  HermEig out;
  out.values.resize(n);
  out.vectors.resize(n);
  for (size_t i = 0; i < n; ++i) {
    out.values[i] = a.at(order[i], order[i]).real();
    out.vectors[i].resize(n);
    for (size_t k = 0; k < n; ++k) out.vectors[i][k] = vecs.at(k, order[i]);
  }
  return out;
}

DensityMatrix::DensityMatrix(Mat m) : m_(std::move(m)) {
  if (m_.rows != m_.cols) throw Error(Err::DimMismatch, "DensityMatrix: non-square");
}

DensityMatrix DensityMatrix::from_pure(const PureState& s) {
  const auto& a = s.amplitudes();
  Mat m(a.size(), a.size());
  for (size_t r = 0; r < a.size(); ++r)
    for (size_t c = 0; c < a.size(); ++c) m.at(r, c) = a[r] * std::conj(a[c]);
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(size_t dim) {
  Mat m = Mat::identity(dim).scaled(cplx(1.0 / double(dim), 0));
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::random(size_t dim, Rng& rng) {
  // rho = G G^dag / Tr with Gaussian-ish entries (sum of uniforms).
  auto gauss = [&rng]() {
    double s = 0;
    for (int i = 0; i < 6; ++i) s += rng.next_double();
    return s - 3.0;
  };
  Mat g(dim, dim);
  for (cplx& x : g.v) x = cplx(gauss(), gauss());
  Mat m = g * g.dagger();
  double tr = m.trace().real();
  return DensityMatrix(m.scaled(cplx(1.0 / tr, 0)));
}

double DensityMatrix::trace_real() const { return m_.trace().real(); }

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

void DensityMatrix::validate() const {
  if (m_.max_abs_diff(m_.dagger()) > 1e-9)
    throw Error(Err::Internal, "DensityMatrix: not Hermitian");
  cplx tr = m_.trace();
  if (std::abs(tr.imag()) > 1e-9 || tr.real() > 1 + 1e-9 || tr.real() < -1e-9)
    throw Error(Err::Internal, "DensityMatrix: trace outside [0,1]");
  auto eig = herm_eig(m_);
  if (!eig.values.empty() && eig.values.front() < -1e-9)
    throw Error(Err::Internal, "DensityMatrix: negative eigenvalue");
}

double trace_overlap(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(Err::DimMismatch, "trace_overlap: dimension mismatch");
  cplx t(0, 0);
  const Mat& ma = a.mat();
  const Mat& mb = b.mat();
  for (size_t r = 0; r < ma.rows; ++r)
    for (size_t c = 0; c < ma.cols; ++c) t += ma.at(r, c) * mb.at(c, r);
  if (std::abs(t.imag()) > 1e-9)
    throw Error(Err::Internal, "trace_overlap: non-real value");
  return t.real();
}

double hs_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(Err::DimMismatch, "hs_distance: dimension mismatch");
  double s = 0;
  for (size_t i = 0; i < a.mat().v.size(); ++i) s += std::norm(a.mat().v[i] - b.mat().v[i]);
  return std::sqrt(s);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  Mat d = a.mat() - b.mat();
  auto eig = herm_eig(d);
  double s = 0;
  for (double v : eig.values) s += std::abs(v);
  return s / 2.0;
}

std::pair<double, double> check_trace_identity(const DensityMatrix& a, const DensityMatrix& b) {
  double lhs = trace_overlap(a, b);
  double hs = hs_distance(a, b);
  double rhs = 0.5 * (a.purity() + b.purity()) - 0.5 * hs * hs;
  return {lhs, rhs};
}

int povm_accuracy(const ClassicalDescription& desc, const DensityMatrix& state, Rng& rng) {
  if (desc.is_null()) return 1;
  double p0 = trace_overlap(*desc.matrix, state);
  p0 = std::clamp(p0, 0.0, 1.0);
  return rng.next_double() < p0 ? 0 : 1;
}

size_t round_to_set(const std::vector<ClassicalDescription>& omega,
                    const ClassicalDescription& desc) {
  if (omega.empty()) throw Error(Err::EmptySet, "round_to_set: empty candidate set");
  if (desc.is_null()) throw Error(Err::Usage, "round_to_set: null description");
  size_t best = 0;
  double best_val = -1;
  for (size_t i = 0; i < omega.size(); ++i) {
    if (omega[i].is_null()) throw Error(Err::Usage, "round_to_set: null candidate");
    double v = trace_overlap(*omega[i].matrix, *desc.matrix);
    if (v > best_val + 1e-15) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

}  // namespace qfu
