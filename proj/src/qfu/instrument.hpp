#pragma once

#include <map>
#include <string>
#include <vector>

#include "qfu/density.hpp"

namespace qfu {

// One interactive step of a quantum instrument: a family {E_y} of
// trace-non-increasing CP maps, given by Kraus blocks, whose sum is trace
// preserving. The step consumes a classical input bitstring x (prepended to
// the quantum register as |x><x|) and produces a classical outcome y plus the
// post-measurement register.
struct QuantumInstrumentStep {
  // outcome label (bitstring as string of '0'/'1') -> Kraus blocks. Blocks
  // may be rectangular: rows = output dimension, cols = 2^{|x|} * input dim.
  std::map<std::string, std::vector<Mat>> kraus_branches;

  size_t input_dim() const;
  size_t classical_in_bits(size_t quantum_dim) const;

  // Verifies sum_y sum_k B^dag B = I within tol; throws NotTracePreserving.
  void check_trace_preserving(double tol = 1e-6) const;
};

struct InstrumentResult {
  std::string outcome;
  DensityMatrix post;      // renormalized branch state
  double probability = 0;  // branch probability
};

// Runs one step on `input` with classical input bits `classical_in`.
// With `forced` non-null the named branch is taken (replay); a forced branch
// of probability < 1e-12 raises ZeroNorm.
InstrumentResult run_instrument(const QuantumInstrumentStep& step, const DensityMatrix& input,
                                const Bits& classical_in, Rng& rng,
                                const std::string* forced = nullptr);

// |x><x| (x) rho, with x in the high-order bits.
DensityMatrix embed_classical(const Bits& x, const DensityMatrix& rho);

// Builds an instrument from a unitary U on a register whose low-order
// `ancilla_qubits` enter as |0..0> and whose high-order `outcome_qubits` are
// measured computationally afterwards: B_y = (<y| (x) I) U (I (x) |0^a>).
// Used for random scripted converters.
QuantumInstrumentStep instrument_from_unitary(const Mat& u, int ancilla_qubits,
                                              int outcome_qubits);

}  // namespace qfu
