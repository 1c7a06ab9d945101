#pragma once

#include <vector>

#include "qfu/angle.hpp"
#include "qfu/common.hpp"
#include "qfu/rng.hpp"

namespace qfu {

enum class GateId { H, X, Z, S, T, CZ, CNOT, Rz };

struct Gate {
  GateId id;
  int a = 0;           // target (control for CNOT)
  int b = -1;          // second qubit for CZ/CNOT (CNOT target)
  AngleOctant angle;   // Rz only

  static Gate single(GateId g, int q) { return Gate{g, q, -1, AngleOctant(0)}; }
  static Gate cz(int q1, int q2) { return Gate{GateId::CZ, q1, q2, AngleOctant(0)}; }
  static Gate cnot(int ctrl, int tgt) { return Gate{GateId::CNOT, ctrl, tgt, AngleOctant(0)}; }
  static Gate rz(int q, AngleOctant a) { return Gate{GateId::Rz, q, -1, a}; }
};

// Dense statevector over up to 12 qubits. Qubit 0 is the least significant
// bit of the basis index.
class PureState {
 public:
  PureState() : qubits_(0), amps_(1, cplx(1, 0)) {}
  explicit PureState(int qubits);  // |0...0>

  static PureState computational(int qubits, uint64_t basis_index);
  // (|0> + e^{i theta}|1>)/sqrt(2)
  static PureState plus(AngleOctant theta);
  static PureState tensor(const PureState& a, const PureState& b);

  int qubit_count() const { return qubits_; }
  size_t dim() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }

  double norm2() const;
  void normalize();

  void apply(const Gate& g);

  // |<other|this>|^2 (states of equal qubit count).
  double overlap(const PureState& other) const;

 private:
  int qubits_;
  std::vector<cplx> amps_;
};

PureState apply_circuit(PureState state, const std::vector<Gate>& gates);

// Measures `qubit` in the {|+_delta>, |-_delta>} basis; the measured qubit is
// removed from the register. With `forced` >= 0 the given outcome is taken
// instead of sampling (transcript replay); a forced branch of probability
// below 1e-12 raises ZeroNorm.
std::pair<int, PureState> measure_rotated(const PureState& state, int qubit, AngleOctant delta,
                                          Rng& rng, int forced = -1);

// Computational-basis measurement, same removal semantics.
std::pair<int, PureState> measure_computational(const PureState& state, int qubit, Rng& rng,
                                                int forced = -1);

}  // namespace qfu
