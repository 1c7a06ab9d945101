#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qfu/density.hpp"
#include "qfu/instrument.hpp"
#include "qfu/state.hpp"

using namespace qfu;

namespace {

DensityMatrix plus_density(int octant) {
  return DensityMatrix::from_pure(PureState::plus(AngleOctant(octant)));
}

}  // namespace

TEST_CASE("H on |0> gives |+>") {
  PureState s(1);
  s.apply(Gate::single(GateId::H, 0));
  CHECK(s.overlap(PureState::plus(AngleOctant(0))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Rz(pi/2) H on |0> gives the pi/2 equator state") {
  PureState s(1);
  s.apply(Gate::single(GateId::H, 0));
  s.apply(Gate::rz(0, AngleOctant(2)));
  CHECK(s.overlap(PureState::plus(AngleOctant(2))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-qubit graph state stabilizers") {
  // CZ on |+>|+>; stabilizers X(x)Z and Z(x)X must have eigenvalue +1,
  // checked by direct matrix-vector products.
  PureState s = PureState::tensor(PureState::plus(AngleOctant(0)), PureState::plus(AngleOctant(0)));
  s.apply(Gate::cz(0, 1));
  auto eigenplus = [&](std::vector<Gate> ops) {
    PureState t = apply_circuit(s, ops);
    cplx ip(0, 0);
    for (size_t i = 0; i < s.dim(); ++i)
      ip += std::conj(s.amplitudes()[i]) * t.amplitudes()[i];
    return ip;
  };
  cplx xz = eigenplus({Gate::single(GateId::X, 0), Gate::single(GateId::Z, 1)});
  cplx zx = eigenplus({Gate::single(GateId::Z, 0), Gate::single(GateId::X, 1)});
  CHECK(std::abs(xz - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(zx - cplx(1, 0)) < 1e-12);
}

TEST_CASE("norm preserved over a long random circuit") {
  Rng rng(42);
  PureState s(5);
  for (int q = 0; q < 5; ++q) s.apply(Gate::single(GateId::H, q));
  for (int i = 0; i < 100; ++i) {
    int pick = int(rng.below(8));
    int a = int(rng.below(5));
    int b = (a + 1 + int(rng.below(4))) % 5;
    switch (pick) {
      case 0: s.apply(Gate::single(GateId::H, a)); break;
      case 1: s.apply(Gate::single(GateId::X, a)); break;
      case 2: s.apply(Gate::single(GateId::Z, a)); break;
      case 3: s.apply(Gate::single(GateId::S, a)); break;
      case 4: s.apply(Gate::single(GateId::T, a)); break;
      case 5: s.apply(Gate::cz(a, b)); break;
      case 6: s.apply(Gate::cnot(a, b)); break;
      default: s.apply(Gate::rz(a, AngleOctant(int(rng.below(8))))); break;
    }
  }
  CHECK(std::abs(s.norm2() - 1.0) < 1e-9);
}

TEST_CASE("bad target raises") {
  PureState s(2);
  CHECK_THROWS_AS(s.apply(Gate::single(GateId::H, 2)), Error);
}

TEST_CASE("rotated measurement: aligned, orthogonal, and unbiased states") {
  Rng rng(7);
  for (int d = 0; d < 8; ++d) {
    auto [same, p1] = measure_rotated(PureState::plus(AngleOctant(d)), 0, AngleOctant(d), rng);
    CHECK(same == 0);
    auto [orth, p2] =
        measure_rotated(PureState::plus(AngleOctant(d + 4)), 0, AngleOctant(d), rng);
    CHECK(orth == 1);
  }
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) {
    auto [o, p] = measure_rotated(PureState::plus(AngleOctant(2)), 0, AngleOctant(0), rng);
    zeros += (o == 0);
  }
  CHECK(zeros > 4800);
  CHECK(zeros < 5200);
}

TEST_CASE("measured qubit is removed and post-state is correct") {
  // On CZ|+>|+>, measuring qubit 0 at angle 0 leaves |0> or |1> on qubit 1.
  Rng rng(3);
  PureState s = PureState::tensor(PureState::plus(AngleOctant(0)), PureState::plus(AngleOctant(0)));
  s.apply(Gate::cz(0, 1));
  auto [o, post] = measure_rotated(s, 0, AngleOctant(0), rng);
  CHECK(post.qubit_count() == 1);
  CHECK(post.overlap(PureState::computational(1, o)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("forced replay of an impossible branch raises ZeroNorm") {
  Rng rng(1);
  CHECK_THROWS_AS(
      measure_rotated(PureState::plus(AngleOctant(0)), 0, AngleOctant(0), rng, /*forced=*/1),
      Error);
}

TEST_CASE("trace overlap basics") {
  CHECK(trace_overlap(plus_density(0), plus_density(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_overlap(plus_density(0), plus_density(4)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(trace_overlap(plus_density(0), plus_density(2)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(trace_overlap(plus_density(0), DensityMatrix::maximally_mixed(4)), Error);
}

TEST_CASE("trace identity: pure equal pair and mixed pair") {
  auto [l1, r1] = check_trace_identity(plus_density(0), plus_density(0));
  CHECK(l1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1 == doctest::Approx(1.0).epsilon(1e-12));
  // a = I/2, b = |0><0|: Tr(ab) = 1/2; purities 1/2 and 1; ||a-b||_HS^2 = 1/2.
  DensityMatrix zero = DensityMatrix::from_pure(PureState::computational(1, 0));
  auto [l2, r2] = check_trace_identity(DensityMatrix::maximally_mixed(2), zero);
  CHECK(l2 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("trace identity on random pairs, dims 2 and 4") {
  Rng rng(11);
  for (size_t dim : {size_t(2), size_t(4)}) {
    for (int i = 0; i < 100; ++i) {
      DensityMatrix a = DensityMatrix::random(dim, rng);
      DensityMatrix b = DensityMatrix::random(dim, rng);
      auto [lhs, rhs] = check_trace_identity(a, b);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("hermitian eigensolver sanity") {
  // Pauli X: eigenvalues -1, +1.
  Mat x(2, 2);
  x.at(0, 1) = cplx(1, 0);
  x.at(1, 0) = cplx(1, 0);
  auto eig = herm_eig(x);
  CHECK(eig.values[0] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-10));
  // Random Hermitian: reconstruction and orthonormality.
  Rng rng(5);
  DensityMatrix r = DensityMatrix::random(4, rng);
  auto e2 = herm_eig(r.mat());
  Mat rec(4, 4);
  for (size_t i = 0; i < 4; ++i)
    for (size_t a = 0; a < 4; ++a)
      for (size_t b = 0; b < 4; ++b)
        rec.at(a, b) += e2.values[i] * e2.vectors[i][a] * std::conj(e2.vectors[i][b]);
  CHECK(rec.max_abs_diff(r.mat()) < 1e-9);
}

TEST_CASE("trace distance of orthogonal pure states is 1") {
  CHECK(trace_distance(plus_density(0), plus_density(4)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(trace_distance(plus_density(0), plus_density(0)) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("povm accuracy") {
  Rng rng(9);
  // Matching description and state: outcome 0 always.
  for (int i = 0; i < 200; ++i)
    CHECK(povm_accuracy(ClassicalDescription::of(plus_density(3)), plus_density(3), rng) == 0);
  // Null description: outcome 1 always.
  for (int i = 0; i < 200; ++i)
    CHECK(povm_accuracy(ClassicalDescription::null(), plus_density(3), rng) == 1);
  // desc |+>, state |+_{pi/4}>: empirical frequency of 0 near cos^2(pi/8).
  int zeros = 0;
  for (int i = 0; i < 10000; ++i)
    zeros += povm_accuracy(ClassicalDescription::of(plus_density(0)), plus_density(1), rng) == 0;
  double expect = std::cos(M_PI / 8) * std::cos(M_PI / 8);
  CHECK(std::abs(zeros / 10000.0 - expect) < 0.02);
}

TEST_CASE("round_to_set") {
  std::vector<ClassicalDescription> omega;
  for (int k = 0; k < 8; ++k) omega.push_back(ClassicalDescription::of(plus_density(k)));
  // A member maps to its own index.
  for (int k = 0; k < 8; ++k) CHECK(round_to_set(omega, omega[k]) == size_t(k));
  // A state at 0.1 rad rounds to index 0.
  PureState near(1);
  near.amplitudes()[0] = cplx(1 / std::sqrt(2.0), 0);
  near.amplitudes()[1] = std::polar(1 / std::sqrt(2.0), 0.1);
  CHECK(round_to_set(omega, ClassicalDescription::of(DensityMatrix::from_pure(near))) == 0);
  // Maximally mixed ties everywhere; lowest index wins.
  CHECK(round_to_set(omega, ClassicalDescription::of(DensityMatrix::maximally_mixed(2))) == 0);
  CHECK_THROWS_AS(round_to_set({}, omega[0]), Error);
}

TEST_CASE("instrument: identity step") {
  QuantumInstrumentStep step;
  step.kraus_branches[""] = {Mat::identity(2)};
  Rng rng(2);
  auto res = run_instrument(step, plus_density(1), {}, rng);
  CHECK(res.outcome == "");
  CHECK(trace_overlap(res.post, plus_density(1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("instrument: computational measurement of |+> is uniform") {
  QuantumInstrumentStep step;
  Mat p0(2, 2), p1(2, 2);
  p0.at(0, 0) = cplx(1, 0);
  p1.at(1, 1) = cplx(1, 0);
  step.kraus_branches["0"] = {p0};
  step.kraus_branches["1"] = {p1};
  Rng rng(6);
  int zeros = 0;
  for (int i = 0; i < 10000; ++i)
    zeros += run_instrument(step, plus_density(0), {}, rng).outcome == "0";
  CHECK(zeros > 4800);
  CHECK(zeros < 5200);
}

TEST_CASE("instrument: Kraus pair matches direct matrix arithmetic") {
  // Amplitude-damping-style pair on one branch plus a flag branch, compared
  // against an independently computed sum B0 rho B0^dag + B1 rho B1^dag.
  double g = 0.3;
  Mat b0(2, 2), b1(2, 2);
  b0.at(0, 0) = cplx(1, 0);
  b0.at(1, 1) = cplx(std::sqrt(1 - g), 0);
  b1.at(0, 1) = cplx(std::sqrt(g), 0);
  QuantumInstrumentStep step;
  step.kraus_branches[""] = {b0, b1};
  DensityMatrix rho = plus_density(2);
  Rng rng(1);
  auto res = run_instrument(step, rho, {}, rng);
  Mat direct = b0 * rho.mat() * b0.dagger() + b1 * rho.mat() * b1.dagger();
  CHECK(res.post.mat().max_abs_diff(direct) < 1e-12);
  CHECK(res.probability == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("instrument: trace preservation enforced") {
  QuantumInstrumentStep step;
  step.kraus_branches[""] = {Mat::identity(2).scaled(cplx(0.5, 0))};
  Rng rng(1);
  CHECK_THROWS_AS(run_instrument(step, plus_density(0), {}, rng), Error);
}

TEST_CASE("instrument built from a unitary: non-demolition measurement") {
  // U = CNOT(work high bit -> ancilla low bit); measuring the high bit then
  // implements a computational measurement that leaves the collapsed work
  // qubit on the low wire.
  Mat u(4, 4);
  for (size_t c = 0; c < 4; ++c) {
    PureState col = PureState::computational(2, c);
    col.apply(Gate::cnot(1, 0));
    for (size_t r = 0; r < 4; ++r) u.at(r, c) = col.amplitudes()[r];
  }
  auto step = instrument_from_unitary(u, /*ancilla_qubits=*/1, /*outcome_qubits=*/1);
  step.check_trace_preserving();
  Rng rng(13);
  int zeros = 0;
  for (int i = 0; i < 2000; ++i) {
    auto res = run_instrument(step, plus_density(0), {}, rng);
    int y = res.outcome == "0" ? 0 : 1;
    zeros += (y == 0);
    DensityMatrix want = DensityMatrix::from_pure(PureState::computational(1, y));
    CHECK(trace_overlap(res.post, want) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(zeros > 850);
  CHECK(zeros < 1150);
}

TEST_CASE("classical input embedding selects the instrument branch") {
  // Instrument copies the classical bit into the outcome: Kraus blocks that
  // project the classical wire.
  QuantumInstrumentStep step;
  for (int x = 0; x < 2; ++x) {
    Mat b(2, 4);  // trace out classical wire (high bit), keep quantum wire
    b.at(0, size_t(x) * 2 + 0) = cplx(1, 0);
    b.at(1, size_t(x) * 2 + 1) = cplx(1, 0);
    step.kraus_branches[std::string(1, char('0' + x))] = {b};
  }
  Rng rng(4);
  auto r0 = run_instrument(step, plus_density(0), {0}, rng);
  auto r1 = run_instrument(step, plus_density(0), {1}, rng);
  CHECK(r0.outcome == "0");
  CHECK(r1.outcome == "1");
  CHECK(trace_overlap(r1.post, plus_density(0)) == doctest::Approx(1.0).epsilon(1e-12));
}
