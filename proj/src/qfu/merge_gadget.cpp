#include <array>
#include <cmath>

#include "qfu/qfactory.hpp"

namespace qfu {

// Three-wire merge circuit, found by exhaustive search over the
// {CNOT, CZ, H, S, T} family (depth <= 6, two X-basis measurements) and
// frozen here; merge_gadget_max_error() below re-verifies it exhaustively.
//
//   wire 0: first input (index/value description, consumed by measurement 1)
//   wire 1: second input (rotated-set description, becomes the output)
//   wire 2: ancilla |+>, consumed by measurement 2
//
//   H(0); H(1); CNOT(1 -> 0); T(0); X-measure wire 0 -> s1, wire 2 -> s2.
//
// On every honest input pair and every measurement branch of nonzero
// probability the surviving wire is exactly |+_{N pi/4}> with N the octant
// recombined from the session bits and (s1, s2).

namespace {

const std::vector<Gate> kMergeCircuit = {
    Gate::single(GateId::H, 0),
    Gate::single(GateId::H, 1),
    Gate::cnot(1, 0),
    Gate::single(GateId::T, 0),
};

PureState joint_input(const PureState& q1, const PureState& q2) {
  // Qubit 0 = q1 (low bit), qubit 1 = q2, qubit 2 = ancilla.
  PureState anc = PureState::plus(AngleOctant(0));
  return PureState::tensor(anc, PureState::tensor(q2, q1));
}

}  // namespace

std::tuple<int, int, PureState> merge_gadget(const PureState& q1, const PureState& q2,
                                             Rng& rng) {
  if (q1.qubit_count() != 1 || q2.qubit_count() != 1)
    throw Error(Err::LengthMismatch, "merge_gadget: inputs must be single qubits");
  PureState joint = apply_circuit(joint_input(q1, q2), kMergeCircuit);
  auto [s1, rest] = measure_rotated(joint, 0, AngleOctant(0), rng);
  // After removing qubit 0 the ancilla sits at index 1.
  auto [s2, out] = measure_rotated(rest, 1, AngleOctant(0), rng);
  out.normalize();
  return {s1, s2, out};
}

double merge_gadget_max_error() {
  double max_err = 0;
  for (int code = 0; code < 16; ++code) {
    const int B1 = (code >> 3) & 1, B2 = (code >> 2) & 1;
    const int B1p = (code >> 1) & 1, B2p = code & 1;
    PureState joint =
        apply_circuit(joint_input(bb84_state(B1, B2), rotated_state(B1p, B2p)), kMergeCircuit);
    const auto& amps = joint.amplitudes();
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) {
        // Project qubit 0 onto |+/-> (s1) and qubit 2 onto |+/-> (s2).
        std::array<cplx, 2> v{cplx(0, 0), cplx(0, 0)};
        for (size_t i = 0; i < 8; ++i) {
          const int a = int(i) & 1;
          const int b = (int(i) >> 2) & 1;
          const double sign = ((s1 & a) ^ (s2 & b)) ? -1.0 : 1.0;
          v[(i >> 1) & 1] += sign * amps[i];
        }
        v[0] *= 0.5;
        v[1] *= 0.5;
        const double p = std::norm(v[0]) + std::norm(v[1]);
        if (p < 1e-12) continue;  // branch of probability zero
        auto [L1, L2, L3] = compute_L(B1, B2, B1p, B2p, s1, s2);
        PureState target = PureState::plus(AngleOctant(4 * L1 + 2 * L2 + L3));
        const cplx ip = std::conj(target.amplitudes()[0]) * v[0] +
                        std::conj(target.amplitudes()[1]) * v[1];
        max_err = std::max(max_err, std::abs(std::norm(ip) - p));
      }
    }
  }
  return max_err;
}

}  // namespace qfu
