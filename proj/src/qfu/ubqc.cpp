#include "qfu/ubqc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qfu {

AngleOctant angle_update(AngleOctant phi, AngleOctant theta, int r, int sX, int sZ) {
  AngleOctant phi_adapted = (sX & 1) ? (-phi) : phi;
  return phi_adapted + AngleOctant(4 * (sZ & 1)) + theta + AngleOctant(4 * (r & 1));
}

namespace {

double rotated_branch_prob(const PureState& state, int qubit, AngleOctant delta, int outcome) {
  const auto& amps = state.amplitudes();
  const size_t bit = size_t(1) << qubit;
  const cplx ph = std::polar(1.0, -delta.radians());
  const double sign = outcome ? -1.0 : 1.0;
  double p = 0;
  for (size_t i = 0; i < amps.size(); ++i) {
    if (i & bit) continue;
    p += 0.5 * std::norm(amps[i] + sign * ph * amps[i | bit]);
  }
  return p;
}

int dep_xor(const std::vector<int>& deps, const Bits& sbar) {
  int x = 0;
  for (int u : deps) x ^= sbar[u];
  return x;
}

}  // namespace

UBQCResult run_ubqc(const MeasurementPattern& pattern, QubitSource source,
                    const ServerBehavior& behavior, Rng& rng) {
  pattern.validate();
  const int N = pattern.size();
  const int n = pattern.n, m = pattern.m;
  UBQCResult result;
  UBQCSession& ses = result.session;
  ses.source = source;
  ses.transcript.session = rng.split("ubqc-session").next_u64();
  ses.theta.assign(N, AngleOctant(0));
  ses.delta.assign(N, AngleOctant(0));
  ses.r.assign(N, 0);
  ses.s.assign(N, 0);
  ses.sbar.assign(N, 0);

  Rng pad_rng = rng.split("ubqc-pads");
  for (int v = 0; v < N; ++v) ses.r[v] = pad_rng.next_bit();

  const bool honest = behavior.kind == ServerBehavior::Kind::Honest;
  if (!honest && int(behavior.steps.size()) < N)
    throw Error(Err::ScheduleViolation, "ubqc: scripted server has too few steps");

  // Honest path: stream the brickwork state, at most two live columns.
  PureState reg(0);
  std::vector<int> pos(N, -1);
  std::vector<char> edge_done(pattern.edges.size(), 0);
  int prepared_cols = 0;

  Rng source_rng = rng.split("ubqc-source");
  auto prepare_column = [&](int c) {
    for (int i = 0; i < n; ++i) {
      int v = pattern.index(i, c);
      PureState qubit(1);
      if (source == QubitSource::QuantumChannel) {
        ses.theta[v] = AngleOctant(int(source_rng.below(8)));
        qubit = PureState::plus(ses.theta[v]);
      } else {
        TrapdoorKeyPair k1 = toy_gen(4, source_rng);
        // The rotated sub-session can only land in the rotated set when the
        // kernel element has odd weight; keep drawing until it does.
        TrapdoorKeyPair k2 = toy_gen(4, source_rng);
        while (std::count(k2.toy.z.begin(), k2.toy.z.end(), 1) % 2 == 0)
          k2 = toy_gen(4, source_rng);
        QFactory8Outcome out8 = run_8states(k1, k2, ServerBehavior::honest(), source_rng);
        ses.theta[v] = out8.angle();
        qubit = out8.server_pure ? *out8.server_pure : PureState::plus(ses.theta[v]);
      }
      pos[v] = reg.qubit_count();
      reg = PureState::tensor(qubit, reg);
    }
    prepared_cols = c + 1;
    for (size_t e = 0; e < pattern.edges.size(); ++e) {
      if (edge_done[e]) continue;
      auto [a, b] = pattern.edges[e];
      if (pos[a] >= 0 && pos[b] >= 0) {
        reg.apply(Gate::cz(pos[a], pos[b]));
        edge_done[e] = 1;
      }
    }
  };

  DensityMatrix server_rho = DensityMatrix::from_pure(PureState(0));
  Rng measure_rng = rng.split("ubqc-measure");
  Rng script_rng = rng.split("ubqc-script");

  for (int v = 0; v < N; ++v) {
    int col = pattern.col_of(v);
    if (honest)
      while (prepared_cols < std::min(col + 2, m)) prepare_column(prepared_cols);

    int sX = dep_xor(pattern.x_deps[v], ses.sbar);
    int sZ = dep_xor(pattern.z_deps[v], ses.sbar);
    ses.delta[v] = angle_update(pattern.phi[v], ses.theta[v], ses.r[v], sX, sZ);
    ses.transcript.add(v, 'A', Message::classical({uint8_t(ses.delta[v].k)}));

    int s = 0;
    if (honest) {
      auto [outcome, post] = measure_rotated(reg, pos[v], ses.delta[v], measure_rng);
      s = outcome;
      int removed = pos[v];
      reg = std::move(post);
      pos[v] = -1;
      for (int& p : pos)
        if (p > removed) --p;
    } else {
      Bits delta_bits = {uint8_t((ses.delta[v].k >> 2) & 1),
                         uint8_t((ses.delta[v].k >> 1) & 1),
                         uint8_t(ses.delta[v].k & 1)};
      InstrumentResult res =
          run_instrument(behavior.steps[v], server_rho, delta_bits, script_rng);
      if (res.outcome != "0" && res.outcome != "1")
        throw Error(Err::ScheduleViolation, "ubqc: scripted outcome is not a bit");
      s = res.outcome == "1";
      server_rho = res.post;
    }
    ses.s[v] = uint8_t(s);
    ses.sbar[v] = uint8_t(s ^ ses.r[v]);
    ses.transcript.add(v, 'B', Message::classical({uint8_t(s)}));
  }

  result.output.resize(n);
  for (int i = 0; i < n; ++i) result.output[i] = ses.sbar[pattern.index(i, m - 1)];
  return result;
}

std::map<Bits, double> reference_mbqc(const MeasurementPattern& pattern) {
  pattern.validate();
  const int N = pattern.size();
  if (N > 12) throw Error(Err::TooLarge, "reference_mbqc: n*m > 12");
  const int n = pattern.n, m = pattern.m;

  PureState reg(0);
  for (int v = 0; v < N; ++v) reg = PureState::tensor(PureState::plus(AngleOctant(0)), reg);
  for (auto [a, b] : pattern.edges) reg.apply(Gate::cz(a, b));

  std::map<Bits, double> dist;
  Bits outcomes(N, 0);
  Rng dummy(0);
  // Depth-first enumeration of both branches at every node; node v sits at
  // qubit v - depth since earlier nodes are measured (and removed) in order.
  std::function<void(const PureState&, int, double)> walk = [&](const PureState& state, int v,
                                                                double prob) {
    if (v == N) {
      Bits key(n);
      for (int i = 0; i < n; ++i) key[i] = outcomes[pattern.index(i, m - 1)];
      dist[key] += prob;
      return;
    }
    int sX = dep_xor(pattern.x_deps[v], outcomes);
    int sZ = dep_xor(pattern.z_deps[v], outcomes);
    AngleOctant adapted = angle_update(pattern.phi[v], AngleOctant(0), 0, sX, sZ);
    for (int o = 0; o < 2; ++o) {
      double p = rotated_branch_prob(state, 0, adapted, o);
      if (p < 1e-15) continue;
      auto [oc, post] = measure_rotated(state, 0, adapted, dummy, o);
      outcomes[v] = uint8_t(o);
      walk(post, v + 1, prob * p);
    }
    outcomes[v] = 0;
  };
  walk(reg, 0, 1.0);
  return dist;
}

}  // namespace qfu
