#include "qfu/instrument.hpp"

#include <cmath>

namespace qfu {

size_t QuantumInstrumentStep::input_dim() const {
  for (const auto& [y, blocks] : kraus_branches)
    for (const Mat& b : blocks) return b.cols;
  throw Error(Err::EmptySet, "instrument: no branches");
}

size_t QuantumInstrumentStep::classical_in_bits(size_t quantum_dim) const {
  const size_t cols = input_dim();
  if (quantum_dim == 0 || cols % quantum_dim != 0)
    throw Error(Err::DimMismatch, "instrument: register does not divide the input dimension");
  size_t factor = cols / quantum_dim;
  size_t bits = 0;
  while (factor > 1) {
    if (factor % 2 != 0)
      throw Error(Err::DimMismatch, "instrument: classical factor is not a power of two");
    factor /= 2;
    ++bits;
  }
  return bits;
}

void QuantumInstrumentStep::check_trace_preserving(double tol) const {
  const size_t d = input_dim();
  Mat sum(d, d);
  for (const auto& [y, blocks] : kraus_branches)
    for (const Mat& b : blocks) {
      if (b.cols != d) throw Error(Err::DimMismatch, "instrument: Kraus column mismatch");
      sum = sum + b.dagger() * b;
    }
  if (sum.max_abs_diff(Mat::identity(d)) > tol)
    throw Error(Err::NotTracePreserving, "instrument: branch sum is not trace preserving");
}

DensityMatrix embed_classical(const Bits& x, const DensityMatrix& rho) {
  size_t idx = 0;
  for (uint8_t b : x) idx = (idx << 1) | (b & 1);
  const size_t cdim = size_t(1) << x.size();
  const size_t d = rho.dim();
  Mat m(cdim * d, cdim * d);
  for (size_t r = 0; r < d; ++r)
    for (size_t c = 0; c < d; ++c) m.at(idx * d + r, idx * d + c) = rho.mat().at(r, c);
  return DensityMatrix(std::move(m));
}

InstrumentResult run_instrument(const QuantumInstrumentStep& step, const DensityMatrix& input,
                                const Bits& classical_in, Rng& rng, const std::string* forced) {
  step.check_trace_preserving();
  DensityMatrix rho_in = classical_in.empty() ? input : embed_classical(classical_in, input);
  if (rho_in.dim() != step.input_dim())
    throw Error(Err::DimMismatch, "run_instrument: input dimension mismatch");

  struct Branch {
    std::string y;
    Mat state;  // unnormalized
    double p;
  };
  std::vector<Branch> branches;
  double total = 0;
  for (const auto& [y, blocks] : step.kraus_branches) {
    Mat acc;
    bool first = true;
    for (const Mat& b : blocks) {
      Mat term = b * rho_in.mat() * b.dagger();
      acc = first ? term : acc + term;
      first = false;
    }
    if (first) continue;
    double p = acc.trace().real();
    branches.push_back({y, std::move(acc), p});
    total += p;
  }
  if (branches.empty()) throw Error(Err::EmptySet, "run_instrument: no branches");

  size_t pick = branches.size();
  if (forced) {
    for (size_t i = 0; i < branches.size(); ++i)
      if (branches[i].y == *forced) pick = i;
    if (pick == branches.size())
      throw Error(Err::TranscriptMismatch, "run_instrument: forced outcome not a branch");
    if (branches[pick].p < 1e-12)
      throw Error(Err::ZeroNorm, "run_instrument: forced branch has vanishing probability");
  } else {
    double u = rng.next_double() * total;
    double acc = 0;
    for (size_t i = 0; i < branches.size(); ++i) {
      acc += branches[i].p;
      if (u <= acc || i + 1 == branches.size()) {
        pick = i;
        break;
      }
    }
  }
  Branch& b = branches[pick];
  if (b.p < 1e-15) throw Error(Err::ZeroNorm, "run_instrument: zero-probability branch");
  return {b.y, DensityMatrix(b.state.scaled(cplx(1.0 / b.p, 0))), b.p};
}

QuantumInstrumentStep instrument_from_unitary(const Mat& u, int ancilla_qubits,
                                              int outcome_qubits) {
  if (u.rows != u.cols) throw Error(Err::DimMismatch, "instrument_from_unitary: non-square");
  const size_t total = u.rows;
  const size_t adim = size_t(1) << ancilla_qubits;
  const size_t odim = size_t(1) << outcome_qubits;
  if (total % adim || total % odim)
    throw Error(Err::DimMismatch, "instrument_from_unitary: dimension split");
  const size_t in_dim = total / adim;   // ancillas enter as |0..0> at the low bits
  const size_t out_dim = total / odim;  // outcome measured from the high bits
  QuantumInstrumentStep step;
  for (size_t y = 0; y < odim; ++y) {
    std::string label;
    for (int i = outcome_qubits - 1; i >= 0; --i) label += char('0' + ((y >> i) & 1));
    // B_y = (<y| (x) I) U (I (x) |0^a>).
    Mat b(out_dim, in_dim);
    for (size_t r = 0; r < out_dim; ++r)
      for (size_t c = 0; c < in_dim; ++c) b.at(r, c) = u.at(y * out_dim + r, c * adim);
    step.kraus_branches[label] = {std::move(b)};
  }
  return step;
}

}  // namespace qfu
