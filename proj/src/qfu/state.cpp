#include "qfu/state.hpp"

#include <cmath>

namespace qfu {

namespace {
constexpr int kMaxQubits = 14;  // hard cap; protocol code stays <= 12

cplx octant_phase(AngleOctant a) {
  return std::polar(1.0, a.radians());
}
}  // namespace

PureState::PureState(int qubits) : qubits_(qubits) {
  if (qubits < 0 || qubits > kMaxQubits) throw Error(Err::TooLarge, "PureState: qubit count");
  amps_.assign(size_t(1) << qubits, cplx(0, 0));
  amps_[0] = cplx(1, 0);
}

PureState PureState::computational(int qubits, uint64_t basis_index) {
  PureState s(qubits);
  if (basis_index >= s.dim()) throw Error(Err::BadTarget, "computational: index out of range");
  s.amps_[0] = cplx(0, 0);
  s.amps_[basis_index] = cplx(1, 0);
  return s;
}

PureState PureState::plus(AngleOctant theta) {
  PureState s(1);
  const double r = 1.0 / std::sqrt(2.0);
  s.amps_[0] = cplx(r, 0);
  s.amps_[1] = octant_phase(theta) * r;
  return s;
}

PureState PureState::tensor(const PureState& a, const PureState& b) {
  PureState s(a.qubits_ + b.qubits_);
  // b occupies the low-order qubits of the combined register.
  for (size_t i = 0; i < a.amps_.size(); ++i)
    for (size_t j = 0; j < b.amps_.size(); ++j)
      s.amps_[(i << b.qubits_) | j] = a.amps_[i] * b.amps_[j];
  return s;
}

double PureState::norm2() const {
  double n = 0;
  for (const cplx& a : amps_) n += std::norm(a);
  return n;
}

void PureState::normalize() {
  double n = std::sqrt(norm2());
  if (n < 1e-12) throw Error(Err::ZeroNorm, "normalize: zero vector");
  for (cplx& a : amps_) a /= n;
}

void PureState::apply(const Gate& g) {
  auto check = [&](int q) {
    if (q < 0 || q >= qubits_) throw Error(Err::BadTarget, "apply: qubit out of range");
  };
  const size_t n = amps_.size();
  switch (g.id) {
    case GateId::H: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      const double r = 1.0 / std::sqrt(2.0);
      for (size_t i = 0; i < n; ++i) {
        if (i & bit) continue;
        cplx a0 = amps_[i], a1 = amps_[i | bit];
        amps_[i] = (a0 + a1) * r;
        amps_[i | bit] = (a0 - a1) * r;
      }
      break;
    }
    case GateId::X: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      for (size_t i = 0; i < n; ++i)
        if (!(i & bit)) std::swap(amps_[i], amps_[i | bit]);
      break;
    }
    case GateId::Z: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      for (size_t i = 0; i < n; ++i)
        if (i & bit) amps_[i] = -amps_[i];
      break;
    }
    case GateId::S: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      for (size_t i = 0; i < n; ++i)
        if (i & bit) amps_[i] *= cplx(0, 1);
      break;
    }
    case GateId::T: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      const cplx t = octant_phase(AngleOctant(1));
      for (size_t i = 0; i < n; ++i)
        if (i & bit) amps_[i] *= t;
      break;
    }
    case GateId::Rz: {
      check(g.a);
      const size_t bit = size_t(1) << g.a;
      const cplx p = octant_phase(g.angle);
      for (size_t i = 0; i < n; ++i)
        if (i & bit) amps_[i] *= p;
      break;
    }
    case GateId::CZ: {
      check(g.a);
      check(g.b);
      if (g.a == g.b) throw Error(Err::BadTarget, "CZ: identical qubits");
      const size_t m = (size_t(1) << g.a) | (size_t(1) << g.b);
      for (size_t i = 0; i < n; ++i)
        if ((i & m) == m) amps_[i] = -amps_[i];
      break;
    }
    case GateId::CNOT: {
      check(g.a);
      check(g.b);
      if (g.a == g.b) throw Error(Err::BadTarget, "CNOT: identical qubits");
      const size_t cbit = size_t(1) << g.a;
      const size_t tbit = size_t(1) << g.b;
      for (size_t i = 0; i < n; ++i)
        if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
      break;
    }
  }
}

double PureState::overlap(const PureState& other) const {
  if (qubits_ != other.qubits_) throw Error(Err::DimMismatch, "overlap: qubit count mismatch");
  cplx ip(0, 0);
  for (size_t i = 0; i < amps_.size(); ++i) ip += std::conj(other.amps_[i]) * amps_[i];
  return std::norm(ip);
}

PureState apply_circuit(PureState state, const std::vector<Gate>& gates) {
  for (const Gate& g : gates) state.apply(g);
  return state;
}

namespace {

// Shared collapse-and-remove path. basis0(a0, a1) gives the amplitude of the
// outcome-0 branch; outcome 1 uses basis1.
template <typename F0, typename F1>
std::pair<int, PureState> measure_impl(const PureState& state, int qubit, Rng& rng, int forced,
                                       F0 basis0, F1 basis1) {
  const int q = state.qubit_count();
  if (qubit < 0 || qubit >= q) throw Error(Err::BadTarget, "measure: qubit out of range");
  const auto& amps = state.amplitudes();
  const size_t bit = size_t(1) << qubit;
  const size_t half = amps.size() >> 1;
  const size_t low_mask = bit - 1;

  std::vector<cplx> branch0(half), branch1(half);
  double p0 = 0, p1 = 0;
  for (size_t r = 0; r < half; ++r) {
    size_t i = ((r & ~low_mask) << 1) | (r & low_mask);
    cplx a0 = amps[i], a1 = amps[i | bit];
    branch0[r] = basis0(a0, a1);
    branch1[r] = basis1(a0, a1);
    p0 += std::norm(branch0[r]);
    p1 += std::norm(branch1[r]);
  }
  int outcome;
  if (forced >= 0) {
    outcome = forced & 1;
    if ((outcome == 0 ? p0 : p1) < 1e-12)
      throw Error(Err::ZeroNorm, "measure: forced branch has vanishing probability");
  } else {
    outcome = rng.next_double() < p0 / (p0 + p1) ? 0 : 1;
  }
  PureState post(q - 1);
  auto& out = post.amplitudes();
  const auto& src = outcome == 0 ? branch0 : branch1;
  const double scale = 1.0 / std::sqrt(outcome == 0 ? p0 : p1);
  for (size_t r = 0; r < half; ++r) out[r] = src[r] * scale;
  return {outcome, std::move(post)};
}

}  // namespace

std::pair<int, PureState> measure_rotated(const PureState& state, int qubit, AngleOctant delta,
                                          Rng& rng, int forced) {
  const cplx ph = std::polar(1.0, -delta.radians());
  const double r = 1.0 / std::sqrt(2.0);
  return measure_impl(
      state, qubit, rng, forced,
      [&](cplx a0, cplx a1) { return (a0 + ph * a1) * r; },
      [&](cplx a0, cplx a1) { return (a0 - ph * a1) * r; });
}

std::pair<int, PureState> measure_computational(const PureState& state, int qubit, Rng& rng,
                                                int forced) {
  return measure_impl(
      state, qubit, rng, forced,
      [](cplx a0, cplx) { return a0; },
      [](cplx, cplx a1) { return a1; });
}

}  // namespace qfu
