#include "qfu/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>

namespace qfu {

namespace {

constexpr double kPi = 3.14159265358979323846;

Bits random_bits(int n, Rng& rng) {
  Bits b(n);
  for (auto& v : b) v = uint8_t(rng.next_bit());
  return b;
}

// A toy key pair conditioned on its hardcore offset d0 = <c, z>.
TrapdoorKeyPair toy_gen_with_d0(int n, int d0, Rng& rng) {
  for (int tries = 0; tries < 1000; ++tries) {
    TrapdoorKeyPair k = toy_gen(n, rng);
    if (k.d0() == (d0 & 1)) return k;
  }
  throw Error(Err::Internal, "toy_gen_with_d0: rejection sampling exhausted");
}

// First 'B' payload at the given round, as bits.
Bits reply_bits(const Transcript& t, int round) {
  for (const auto& e : t.messages)
    if (e.from == 'B' && e.round == round && e.msg.kind == Message::Kind::Classical)
      return e.msg.as_bits();
  throw Error(Err::TranscriptMismatch, "transcript is missing a server reply round");
}

// Recovers the kernel element from the announced range point by exhaustive
// domain enumeration (public key material only), then post-processes the
// transcript exactly like the client.
QFactory4Outcome exhaustive_outcome(const TrapdoorKeyPair& pub, const Transcript& t,
                                    Basis basis, Rng& rng) {
  if (pub.family != TrapdoorKeyPair::Family::Toy)
    throw Error(Err::NotSupported, "exhaustive recovery handles the toy family only");
  const int n = pub.toy.n;
  if (n > 16) throw Error(Err::TooLarge, "exhaustive recovery bounded to 2^16 keys");

  TrapdoorKeyPair k;
  k.family = TrapdoorKeyPair::Family::Toy;
  k.toy.n = n;
  k.toy.a_rows = pub.toy.a_rows;
  k.toy.c = pub.toy.c;
  k.toy.z.assign(size_t(n), 0);

  RangePoint y;
  y.bits = reply_bits(t, 1);
  const Bits b = reply_bits(t, 2);

  std::vector<Bits> preimages;
  for (uint64_t xi = 0; xi < (uint64_t(1) << n); ++xi) {
    Bits x(n);
    for (int i = 0; i < n; ++i) x[i] = uint8_t((xi >> i) & 1);
    if (k.eval(x) == y) preimages.push_back(std::move(x));
  }
  if (preimages.size() == 2) k.toy.z = xor_bits(preimages[0], preimages[1]);

  QFactory4Outcome out;
  out.basis = basis;
  derive_outcome(k, basis, y, b, rng, out);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Blindness game

GameReport blindness_game(const BlindnessAdversary& adversary, int n, int m, int trials,
                          Rng& rng) {
  auto check_table = [&](const PhiTable& phi) {
    if (int(phi.size()) != n)
      throw Error(Err::AdversaryProtocolViolation, "blindness_game: angle table has wrong rows");
    for (const auto& row : phi)
      if (int(row.size()) != m)
        throw Error(Err::AdversaryProtocolViolation,
                    "blindness_game: angle table has wrong columns");
  };

  int wins = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t));
    Rng adv_rng = trial.split("adversary");
    auto [phi1, phi2] = adversary.choose(n, m, adv_rng);
    check_table(phi1);
    check_table(phi2);

    const int c = int(trial.split("coin").next_bit());
    MeasurementPattern pattern = build_brickwork(n, m, c ? phi2 : phi1);
    Rng run_rng = trial.split("run");
    UBQCResult res = run_ubqc(pattern, adversary.source, adversary.behavior, run_rng);

    BlindnessView view;
    view.delta = res.session.delta;
    view.s = res.session.s;
    if (adversary.leak_theta) view.leaked_theta = res.session.theta;
    if (adversary.guess(view, adv_rng) == c) ++wins;
  }
  return make_report("blindness", trials, wins, "guess-the-angle-table coin; baseline 0.5");
}

// ---------------------------------------------------------------------------
// Hybrid games

GameReport run_hybrid(int game_index, const HybridAdversary& adversary, int trials, Rng& rng) {
  if (game_index < 1 || game_index > 7)
    throw Error(Err::BadIndex, "run_hybrid: game index must be in 1..7");
  const int g = game_index;
  const int toy_n = 4;  // challenger-side key size

  int wins = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t));
    Rng adv_rng = trial.split("adversary");
    Rng ch = trial.split("challenger");

    std::pair<AngleOctant, AngleOctant> phis{AngleOctant(0), AngleOctant(0)};
    if (g <= 6) phis = adversary.choose_phis(adv_rng);

    const int c = int(ch.next_bit());
    const int B1 = int(ch.next_bit());
    const int B1p = int(ch.next_bit());
    const int r = int(ch.next_bit());

    // The key pair is what carries the hidden bit to the server; games 5+
    // drop the first pair, games 3+ the second.
    std::optional<TrapdoorKeyPair> keys1, keys2;
    if (g <= 4) keys1 = toy_gen_with_d0(toy_n, B1, ch);
    if (g <= 2) keys2 = toy_gen_with_d0(toy_n, B1p, ch);

    HybridMessages msg;
    if (g <= 6)
      msg = adversary.respond(keys1 ? &*keys1 : nullptr, keys2 ? &*keys2 : nullptr, adv_rng);

    std::optional<AngleOctant> delta;
    if (g <= 5) {
      int B2 = 0, B2p = 0;
      try {
        if (g <= 4) {
          RangePoint y;
          y.bits = msg.y;
          QFactory4Outcome o;
          derive_outcome(*keys1, Basis::Standard, y, msg.b, ch, o);
          B2 = o.B2;
        }
        if (g <= 2) {
          RangePoint yp;
          yp.bits = msg.yp;
          QFactory4Outcome o;
          derive_outcome(*keys2, Basis::Rotated, yp, msg.bp, ch, o);
          B2p = o.B2;
        }
      } catch (const Error& e) {
        throw Error(Err::AdversaryProtocolViolation,
                    std::string("run_hybrid: malformed server reply: ") + e.what());
      }

      int k;
      const AngleOctant phi = c ? phis.second : phis.first;
      if (g == 1) {
        auto [L1, L2, L3] = compute_L(B1, B2, B1p, B2p, msg.s1, msg.s2);
        k = phi.k + L3 + 2 * L2 + 4 * L1 + 4 * r;
      } else {
        // Games 2..5: the pi digit is folded into the r pad; s1 and the
        // rotated value bit drop out with it.
        int L2;
        if (g <= 3)
          L2 = ((B1p & 1) + (B1 & (B2 ^ msg.s2) & 1)) & 1;
        else
          L2 = int(ch.next_bit());  // B1' one-time pads it anyway
        k = phi.k + (B1 & 1) + 2 * L2 + 4 * r;
      }
      delta = AngleOctant(k);
    }

    if (adversary.guess(delta, adv_rng) == c) ++wins;
  }
  return make_report("hybrid-" + std::to_string(g), trials, wins,
                     "guess the angle-table coin; baseline 0.5");
}

HybridAdversary honest_hybrid_adversary(int toy_n) {
  HybridAdversary a;
  a.choose_phis = [](Rng& r) {
    return std::make_pair(AngleOctant(int(r.below(8))), AngleOctant(int(r.below(8))));
  };
  a.respond = [toy_n](const TrapdoorKeyPair* k1, const TrapdoorKeyPair* k2, Rng& r) {
    HybridMessages m;
    std::optional<PureState> st1, st2;
    if (k1) {
      HonestServerReply rep = honest_server_reply(*k1, Basis::Standard, r);
      m.y = rep.y.bits;
      m.b = rep.b;
      st1 = rep.state;
    } else {
      m.y = random_bits(toy_n, r);
      m.b = random_bits(toy_n, r);
    }
    if (k2) {
      HonestServerReply rep = honest_server_reply(*k2, Basis::Rotated, r);
      m.yp = rep.y.bits;
      m.bp = rep.b;
      st2 = rep.state;
    } else {
      m.yp = random_bits(toy_n, r);
      m.bp = random_bits(toy_n, r);
    }
    if (st1 && st2) {
      auto [s1, s2, merged] = merge_gadget(*st1, *st2, r);
      m.s1 = s1;
      m.s2 = s2;
    } else {
      m.s1 = r.next_bit();
      m.s2 = r.next_bit();
    }
    return m;
  };
  a.guess = [](const std::optional<AngleOctant>&, Rng& r) { return int(r.next_bit()); };
  return a;
}

bool verify_hybrid_rewrite_1_2() {
  // For every fixed hidden-bit assignment the two games' delta values agree
  // as multisets over the pad bit r: the pi digit (whatever it is, carry
  // included) only toggles which r produces which element.
  for (int phik = 0; phik < 8; ++phik) {
    for (int bits = 0; bits < 64; ++bits) {
      const int B1 = bits & 1, B2 = (bits >> 1) & 1, B1p = (bits >> 2) & 1,
                B2p = (bits >> 3) & 1, s1 = (bits >> 4) & 1, s2 = (bits >> 5) & 1;
      auto [L1, L2, L3] = compute_L(B1, B2, B1p, B2p, s1, s2);
      const int L2b = ((B1p & 1) + (B1 & (B2 ^ s2) & 1)) & 1;
      std::vector<int> d1, d2;
      for (int r = 0; r < 2; ++r) {
        d1.push_back(AngleOctant(phik + L3 + 2 * L2 + 4 * L1 + 4 * r).k);
        d2.push_back(AngleOctant(phik + B1 + 2 * L2b + 4 * r).k);
      }
      std::sort(d1.begin(), d1.end());
      std::sort(d2.begin(), d2.end());
      if (d1 != d2) return false;
    }
  }
  return true;
}

bool verify_hybrid_rewrite_3_4() {
  // B1' one-time pads the pi/2 digit: over B1' in {0,1} the digit is exactly
  // {0,1} for every value of the masking term.
  for (int bits = 0; bits < 8; ++bits) {
    const int B1 = bits & 1, B2 = (bits >> 1) & 1, s2 = (bits >> 2) & 1;
    std::vector<int> digits;
    for (int B1p = 0; B1p < 2; ++B1p)
      digits.push_back(((B1p & 1) + (B1 & (B2 ^ s2) & 1)) & 1);
    std::sort(digits.begin(), digits.end());
    if (digits != std::vector<int>{0, 1}) return false;
  }
  return true;
}

bool verify_hybrid_rewrite_5_6_7() {
  // With all three digits independent coins, delta is uniform over the eight
  // octants for every angle choice, hence carries no information and can be
  // dropped; with it gone the angle tables are unused too.
  for (int phik = 0; phik < 8; ++phik) {
    std::vector<int> count(8, 0);
    for (int bits = 0; bits < 8; ++bits) {
      const int L3 = bits & 1, L2 = (bits >> 1) & 1, r = (bits >> 2) & 1;
      ++count[AngleOctant(phik + L3 + 2 * L2 + 4 * r).k];
    }
    for (int c : count)
      if (c != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Basis blindness

GameReport basis_blindness_estimate(BasisBlindKind kind, const BasisGuesser& guesser,
                                    int trials, Rng& rng) {
  int wins = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t));
    Rng key_rng = trial.split("keys");
    Rng run_rng = trial.split("run");
    Rng guess_rng = trial.split("guesser");

    if (kind == BasisBlindKind::FourState) {
      TrapdoorKeyPair keys = toy_gen(6, key_rng);
      QFactory4Outcome out = run_4states(keys, ServerBehavior::honest(), Basis::Standard,
                                         run_rng);
      BasisBlindView view;
      view.keys1 = &keys;
      view.t1 = &out.transcript;
      if (guesser(view, guess_rng).first == out.B1) ++wins;
    } else {
      TrapdoorKeyPair k1 = toy_gen(4, key_rng);
      TrapdoorKeyPair k2 = toy_gen(4, key_rng);
      while (std::count(k2.toy.z.begin(), k2.toy.z.end(), 1) % 2 == 0)
        k2 = toy_gen(4, key_rng);
      QFactory8Outcome out = run_8states(k1, k2, ServerBehavior::honest(), run_rng);
      BasisBlindView view;
      view.keys1 = &k1;
      view.keys2 = &k2;
      view.t1 = &out.sub_standard.transcript;
      view.t2 = &out.sub_rotated.transcript;
      view.s1 = out.s1;
      view.s2 = out.s2;
      if (guesser(view, guess_rng) == std::make_pair(out.L2, out.L3)) ++wins;
    }
  }
  const bool four = kind == BasisBlindKind::FourState;
  return make_report(four ? "basis-blind-4" : "basis-blind-8", trials, wins,
                     four ? "guess the index bit; baseline 0.5"
                          : "guess the pi/2 and pi/4 digits; baseline 0.25");
}

std::pair<int, int> brute_force_basis_guesser(const BasisBlindView& view, Rng& rng) {
  if (!view.keys1 || !view.t1)
    throw Error(Err::Usage, "brute_force_basis_guesser: first session view is required");
  QFactory4Outcome o1 = exhaustive_outcome(*view.keys1, *view.t1, Basis::Standard, rng);
  if (!view.keys2 || !view.t2) return {o1.B1, 0};
  QFactory4Outcome o2 = exhaustive_outcome(*view.keys2, *view.t2, Basis::Rotated, rng);
  auto [L1, L2, L3] = compute_L(o1.B1, o1.B2, o2.B1, o2.B2, view.s1, view.s2);
  (void)L1;
  return {L2, L3};
}

// ---------------------------------------------------------------------------
// Converter emulation

ClassicalDescription emulate_classical_converter(const std::vector<QuantumInstrumentStep>& steps,
                                                 const Transcript& transcript) {
  DensityMatrix rho;  // the trivial (1) register
  std::deque<uint8_t> pending;  // unconsumed client payload bytes
  size_t next_step = 0;
  Rng unused(0);  // forced branches never sample

  for (const auto& e : transcript.messages) {
    if (e.msg.kind != Message::Kind::Classical)
      throw Error(Err::TranscriptMismatch,
                  "emulate_classical_converter: quantum payload in a classical transcript");
    if (e.from == 'A') {
      for (uint8_t v : e.msg.payload) pending.push_back(v);
      continue;
    }
    if (e.from != 'B') continue;
    if (next_step >= steps.size())
      throw Error(Err::TranscriptMismatch,
                  "emulate_classical_converter: more server replies than steps");
    const QuantumInstrumentStep& step = steps[next_step++];
    const size_t cx = step.classical_in_bits(rho.dim());

    Bits cin;
    if (cx > 0) {
      // Payloads are bit-per-byte, except a single packed byte feeding a
      // multi-bit step (the angle messages): then its low cx bits are taken
      // most-significant first.
      if (pending.size() == 1 && cx > 1 && cx <= 8) {
        const uint8_t v = pending.front();
        pending.pop_front();
        for (int i = int(cx) - 1; i >= 0; --i) cin.push_back((v >> i) & 1);
      } else if (pending.size() >= cx) {
        for (size_t i = 0; i < cx; ++i) {
          cin.push_back(pending.front() & 1);
          pending.pop_front();
        }
      } else {
        throw Error(Err::TranscriptMismatch,
                    "emulate_classical_converter: step wants more input bits than sent");
      }
    }

    std::string label;
    for (uint8_t v : e.msg.payload) label += (v & 1) ? '1' : '0';
    try {
      InstrumentResult res = run_instrument(step, rho, cin, unused, &label);
      rho = res.post;
    } catch (const Error& err) {
      throw Error(Err::TranscriptMismatch,
                  std::string("emulate_classical_converter: reply impossible for step: ") +
                      err.what());
    }
  }
  if (next_step != steps.size())
    throw Error(Err::TranscriptMismatch,
                "emulate_classical_converter: transcript ended before all steps ran");
  return ClassicalDescription::of(rho);
}

std::vector<QuantumInstrumentStep> honest_toy_server_steps(const TrapdoorKeyPair& keys) {
  if (keys.family != TrapdoorKeyPair::Family::Toy)
    throw Error(Err::NotSupported, "honest_toy_server_steps: toy family only");
  const int n = keys.toy.n;
  if (n > 6) throw Error(Err::TooLarge, "honest_toy_server_steps: n > 6");
  const size_t dim = size_t(1) << (n + 1);  // domain bits + hardcore target, target low
  const double amp = std::pow(2.0, -n / 2.0);

  auto label_of = [n](uint64_t v) {
    std::string s;
    for (int i = 0; i < n; ++i) s += ((v >> i) & 1) ? '1' : '0';
    return s;
  };

  // Step 1: evaluate f and h in superposition and announce the range point.
  QuantumInstrumentStep s1;
  for (uint64_t xi = 0; xi < (uint64_t(1) << n); ++xi) {
    Bits x(n);
    for (int i = 0; i < n; ++i) x[i] = uint8_t((xi >> i) & 1);
    uint64_t yi = 0;
    const RangePoint y = keys.eval(x);
    for (int i = 0; i < n; ++i)
      if (y.bits[i]) yi |= uint64_t(1) << i;
    auto& blocks = s1.kraus_branches[label_of(yi)];
    if (blocks.empty()) blocks.emplace_back(dim, 1);
    blocks[0].at((xi << 1) | uint64_t(keys.hardcore(x)), 0) += amp;
  }

  // Step 2: Fourier-measure the domain register and announce the mask.
  QuantumInstrumentStep s2;
  for (uint64_t bi = 0; bi < (uint64_t(1) << n); ++bi) {
    Mat k(2, dim);
    for (uint64_t xi = 0; xi < (uint64_t(1) << n); ++xi) {
      const double sign = (std::popcount(bi & xi) & 1) ? -amp : amp;
      for (uint64_t tbit = 0; tbit < 2; ++tbit) k.at(tbit, (xi << 1) | tbit) = sign;
    }
    s2.kraus_branches[label_of(bi)] = {k};
  }

  s1.check_trace_preserving();
  s2.check_trace_preserving();
  return {std::move(s1), std::move(s2)};
}

// ---------------------------------------------------------------------------
// Describability

DescriberResult describability_attack(DescriberTarget target, DescriberMethod method,
                                      int trials, Rng& rng, TrapdoorKeyPair::Family family) {
  if (family == TrapdoorKeyPair::Family::Lwe) {
    if (method == DescriberMethod::BruteForce)
      throw Error(Err::NotSupported, "describability_attack: brute force needs the toy family");
    if (target == DescriberTarget::QFactory8)
      throw Error(Err::NotSupported,
                  "describability_attack: eight-state runs use the toy family");
  }

  DescriberResult result;
  result.method_tag = method == DescriberMethod::Trapdoor      ? "TrapdoorDescriber"
                      : method == DescriberMethod::BruteForce ? "BruteForceDescriber"
                                                              : "MeasureAndPrepare";
  result.overlaps.reserve(size_t(trials));

  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t));
    Rng key_rng = trial.split("keys");
    Rng run_rng = trial.split("run");
    Rng desc_rng = trial.split("describer");

    DensityMatrix client, described = DensityMatrix::maximally_mixed(2);
    if (target == DescriberTarget::QFactory4) {
      TrapdoorKeyPair keys = family == TrapdoorKeyPair::Family::Toy
                                 ? toy_gen(6, key_rng)
                                 : lwe_gen(LweParams{}, key_rng);
      QFactory4Outcome out = run_4states(keys, ServerBehavior::honest(), Basis::Standard,
                                         run_rng);
      client = DensityMatrix::from_pure(out.description_state());
      if (method == DescriberMethod::Trapdoor) {
        QFactory4Outcome redo;
        redo.basis = Basis::Standard;
        derive_outcome(keys, Basis::Standard, out.y, out.b, desc_rng, redo);
        described = DensityMatrix::from_pure(redo.description_state());
      } else if (method == DescriberMethod::BruteForce) {
        QFactory4Outcome redo =
            exhaustive_outcome(keys, out.transcript, Basis::Standard, desc_rng);
        described = DensityMatrix::from_pure(redo.description_state());
      }
    } else {
      TrapdoorKeyPair k1 = toy_gen(4, key_rng);
      TrapdoorKeyPair k2 = toy_gen(4, key_rng);
      while (std::count(k2.toy.z.begin(), k2.toy.z.end(), 1) % 2 == 0)
        k2 = toy_gen(4, key_rng);
      QFactory8Outcome out = run_8states(k1, k2, ServerBehavior::honest(), run_rng);
      client = DensityMatrix::from_pure(PureState::plus(out.angle()));
      if (method != DescriberMethod::Blind) {
        QFactory4Outcome o1, o2;
        if (method == DescriberMethod::Trapdoor) {
          o1.basis = Basis::Standard;
          o2.basis = Basis::Rotated;
          derive_outcome(k1, Basis::Standard, out.sub_standard.y, out.sub_standard.b,
                         desc_rng, o1);
          derive_outcome(k2, Basis::Rotated, out.sub_rotated.y, out.sub_rotated.b, desc_rng,
                         o2);
        } else {
          o1 = exhaustive_outcome(k1, out.sub_standard.transcript, Basis::Standard, desc_rng);
          o2 = exhaustive_outcome(k2, out.sub_rotated.transcript, Basis::Rotated, desc_rng);
        }
        auto [L1, L2, L3] = compute_L(o1.B1, o1.B2, o2.B1, o2.B2, out.s1, out.s2);
        described =
            DensityMatrix::from_pure(PureState::plus(AngleOctant(4 * L1 + 2 * L2 + L3)));
      }
    }
    result.overlaps.push_back(trace_overlap(client, described));
  }

  result.mean_overlap =
      result.overlaps.empty()
          ? 0.0
          : std::accumulate(result.overlaps.begin(), result.overlaps.end(), 0.0) /
                double(result.overlaps.size());
  return result;
}

// ---------------------------------------------------------------------------
// Cloning bound

double cloning_bound_search(int grid_resolution) {
  if (grid_resolution < 2)
    throw Error(Err::Usage, "cloning_bound_search: need at least 2 grid points");
  // Measure along |+_alpha>/|-_alpha>, prepare |+_beta0> or |+_beta1>. The
  // mean overlap splits into independent contributions of beta0 and beta1 for
  // fixed alpha, so the grid is alpha x beta instead of alpha x beta0 x beta1.
  const int res = grid_resolution;
  double best = 0;
  for (int i = 0; i < res; ++i) {
    const double alpha = 2 * kPi * i / res;
    double best0 = 0, best1 = 0;
    for (int j = 0; j < res; ++j) {
      const double beta = 2 * kPi * j / res;
      double f = 0, g = 0;
      for (int k = 0; k < 4; ++k) {
        const double theta = kPi * k / 2;
        const double co = std::cos((theta - alpha) / 2), si = std::sin((theta - alpha) / 2);
        const double ov = std::cos((theta - beta) / 2);
        f += 0.25 * co * co * ov * ov;
        g += 0.25 * si * si * ov * ov;
      }
      best0 = std::max(best0, f);
      best1 = std::max(best1, g);
    }
    best = std::max(best, best0 + best1);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Signaling game

GameReport signaling_game(const SignalingStrategy& strategy, int trials, Rng& rng, bool leak) {
  int wins = 0;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t));
    const AngleOctant phi0(2 * int(trial.split("phi0").below(4)));
    std::optional<AngleOctant> leaked;
    if (leak) leaked = phi0;
    Rng guess_rng = trial.split("strategy");
    const int cls = (phi0.k % 4) / 2;  // class of phi0 mod pi
    if (strategy(leaked, guess_rng) == cls) ++wins;
  }
  return make_report("signaling", trials, wins,
                     "guess phi0 mod pi from nothing; baseline 0.5 over the two classes");
}

}  // namespace qfu
