#include "qfu/qfactory.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qfu {

namespace {

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<uint8_t> u64_bytes(uint64_t v) {
  std::vector<uint8_t> out(8);
  for (int i = 0; i < 8; ++i) out[i] = (v >> (8 * i)) & 0xff;
  return out;
}

int popcount_bits(const Bits& x) {
  int c = 0;
  for (uint8_t v : x) c += (v & 1);
  return c;
}

std::string public_key_json(const TrapdoorKeyPair& keys) {
  nlohmann::json j;
  if (keys.family == TrapdoorKeyPair::Family::Toy) {
    j["family"] = "toy";
    j["n"] = keys.toy.n;
    std::vector<std::vector<int>> rows;
    for (const auto& r : keys.toy.a_rows) rows.emplace_back(r.begin(), r.end());
    j["a"] = rows;
    j["c"] = std::vector<int>(keys.toy.c.begin(), keys.toy.c.end());
  } else {
    j["family"] = "lwe";
    j["n"] = keys.lwe.n;
    j["q"] = keys.lwe.q();
    j["k"] = keys.lwe.k_mat;
    j["y_f"] = keys.lwe.y_f;
    j["w"] = std::vector<int>(keys.lwe.w.begin(), keys.lwe.w.end());
  }
  return j.dump();
}

}  // namespace

// Client post-processing shared by all engines: outcome bits from (y, b).
void derive_outcome(const TrapdoorKeyPair& keys, Basis basis, const RangePoint& y,
                    const Bits& b, Rng& rng, QFactory4Outcome& out) {
  auto pre = invert(keys, y);
  if (!pre) {
    // Cheating branch: the index bit falls back to the trapdoor's d0 and the
    // value bit is a fresh coin.
    out.not_two_preimages = true;
    out.B1 = keys.d0();
    out.B2 = rng.next_bit();
    return;
  }
  out.x0 = pre->first;
  out.x1 = pre->second;
  const int hx0 = keys.hardcore(out.x0);
  const int hx1 = keys.hardcore(out.x1);
  out.B1 = hx0 ^ hx1;
  if (basis == Basis::Standard) {
    out.B2 = compute_B2(keys.d0(), b, out.x0, out.x1, hx0, hx1);
    return;
  }
  // Rotated basis: the relative phase picked up by the surviving branch is
  // i^t with t = (2 b.(x0^x1) - (|x1|-|x0|)) mod 4, mirrored when the
  // lexicographically first preimage carries h = 1. Odd t lands in the
  // rotated set; even t (even-distance preimage pair) is off-axis and the
  // eight-state driver rediscards such sessions.
  if (hx0 == hx1) {
    out.B2 = hx0;
    return;
  }
  const Bits diff = xor_bits(out.x0, out.x1);
  const int delta_w = popcount_bits(out.x1) - popcount_bits(out.x0);
  const int p = dot2(b, diff);
  int t = ((2 * p - delta_w) % 4 + 4) % 4;
  if (hx0 == 1) t = (4 - t) % 4;
  if (t % 2 == 0) {
    out.rotated_off_axis = true;
    out.B2 = 0;
  } else {
    // Labeling: i^3 (octant 6) is B2' = 0, i^1 (octant 2) is B2' = 1. This
    // orientation is the one under which the frozen merge circuit reproduces
    // the recombination formulas directly.
    out.B2 = t == 1 ? 1 : 0;
  }
}

namespace {

// --- dense engine (toy family): full statevector over domain+range+target ---

struct EngineOutput {
  RangePoint y;
  Bits b;
  PureState state;  // the single remaining (target) qubit
};

EngineOutput dense_engine(const TrapdoorKeyPair& keys, Basis basis, Rng& rng) {
  if (keys.family != TrapdoorKeyPair::Family::Toy)
    throw Error(Err::NotSupported, "dense engine: toy family only");
  const int n = keys.toy.n;
  const int total = 1 + n + n;  // target 0, domain 1..n, range n+1..2n
  PureState s(total);
  for (int i = 0; i < n; ++i) s.apply(Gate::single(GateId::H, 1 + i));
  // U_f and U_h as one basis permutation: |x>|0>|0> -> |x>|f(x)>|h(x)>.
  std::vector<cplx> out(s.dim(), cplx(0, 0));
  for (size_t idx = 0; idx < s.dim(); ++idx) {
    if (s.amplitudes()[idx] == cplx(0, 0)) continue;
    Bits x(n);
    for (int i = 0; i < n; ++i) x[i] = (idx >> (1 + i)) & 1;
    RangePoint y = keys.eval(x);
    size_t tgt = idx;
    for (int j = 0; j < n; ++j)
      if (y.bits[j]) tgt ^= size_t(1) << (1 + n + j);
    if (keys.hardcore(x)) tgt ^= 1;
    out[tgt] += s.amplitudes()[idx];
  }
  s.amplitudes() = std::move(out);

  EngineOutput res;
  res.y.bits.resize(n);
  for (int j = n - 1; j >= 0; --j) {
    auto [bit, post] = measure_computational(s, 1 + n + j, rng);
    res.y.bits[j] = uint8_t(bit);
    s = std::move(post);
  }
  const AngleOctant meas(basis == Basis::Standard ? 0 : 2);
  res.b.resize(n);
  for (int i = n - 1; i >= 0; --i) {
    auto [bit, post] = measure_rotated(s, 1 + i, meas, rng);
    res.b[i] = uint8_t(bit);
    s = std::move(post);
  }
  res.state = std::move(s);
  return res;
}

// --- structured engine: exact two-branch bookkeeping, any domain size ---

EngineOutput structured_engine(const TrapdoorKeyPair& keys, Basis basis, Rng& rng) {
  Bits x = random_domain_element(keys, rng);
  RangePoint y = keys.eval(x);
  auto pre = invert(keys, y);
  if (!pre) throw Error(Err::Internal, "structured engine: honest point failed to invert");
  const Bits& x0 = pre->first;
  const Bits& x1 = pre->second;
  const int hx0 = keys.hardcore(x0);
  const int hx1 = keys.hardcore(x1);
  const Bits diff = xor_bits(x0, x1);
  const int delta_w = popcount_bits(x1) - popcount_bits(x0);
  const size_t nbits = x0.size();

  EngineOutput res;
  res.y = std::move(y);
  res.b.resize(nbits);
  // Phase of the x1 branch relative to x0 for measurement parity p:
  // zeta = zeta0 * (-1)^p with zeta0 = (-i)^{delta_w} (rotated) or 1.
  auto zeta_quarter = [&](int p) {
    int t = 2 * p;
    if (basis == Basis::Rotated) t -= delta_w;
    return ((t % 4) + 4) % 4;
  };
  if (hx0 != hx1) {
    // Every measurement string is equally likely; the target keeps both
    // branches with relative phase i^t.
    for (auto& bit : res.b) bit = uint8_t(rng.next_bit());
    const int t = zeta_quarter(dot2(res.b, diff));
    PureState out(1);
    const double r = 1.0 / std::sqrt(2.0);
    out.amplitudes()[hx0] = cplx(r, 0);
    out.amplitudes()[hx1] = std::polar(r, t * M_PI / 2.0);
    res.state = std::move(out);
  } else {
    // Branches interfere on the target; only the parity p = b.diff matters
    // and is sampled from |1 + i^{t(p)}|^2.
    const double w0 = std::norm(cplx(1, 0) + std::polar(1.0, zeta_quarter(0) * M_PI / 2.0));
    const double w1 = std::norm(cplx(1, 0) + std::polar(1.0, zeta_quarter(1) * M_PI / 2.0));
    const int p = rng.next_double() * (w0 + w1) < w0 ? 0 : 1;
    size_t pivot = nbits;
    for (size_t i = 0; i < nbits; ++i)
      if (diff[i]) {
        pivot = i;
        break;
      }
    int acc = 0;
    for (size_t i = 0; i < nbits; ++i) {
      if (i == pivot) continue;
      res.b[i] = uint8_t(rng.next_bit());
      acc ^= (res.b[i] & diff[i]);
    }
    res.b[pivot] = uint8_t(acc ^ p);
    res.state = PureState::computational(1, uint64_t(hx0));
  }
  return res;
}

void append_round(Transcript& t, int round, char from, const Bits& bits) {
  t.add(round, from, Message::classical_bits(bits));
}

}  // namespace

uint64_t public_key_fingerprint(const TrapdoorKeyPair& keys) {
  return fnv1a(public_key_json(keys));
}

HonestServerReply honest_server_reply(const TrapdoorKeyPair& keys, Basis basis, Rng& rng,
                                      EngineChoice engine) {
  bool dense = engine.kind == EngineChoice::Kind::Dense ||
               (engine.kind == EngineChoice::Kind::Auto &&
                keys.family == TrapdoorKeyPair::Family::Toy && keys.toy.n <= 6);
  if (dense && keys.family != TrapdoorKeyPair::Family::Toy)
    throw Error(Err::NotSupported, "honest server: dense engine needs the toy family");
  EngineOutput eo = dense ? dense_engine(keys, basis, rng) : structured_engine(keys, basis, rng);
  return {std::move(eo.y), std::move(eo.b), std::move(eo.state)};
}

ServerBehavior ServerBehavior::fixed_messages(const std::vector<Bits>& messages) {
  ServerBehavior b;
  b.kind = Kind::Scripted;
  for (const Bits& m : messages) {
    QuantumInstrumentStep step;
    std::string label;
    for (uint8_t v : m) label += char('0' + (v & 1));
    step.kraus_branches[label] = {Mat::identity(1)};
    b.steps.push_back(std::move(step));
  }
  return b;
}

int compute_B2(int d0, const Bits& b, const Bits& x, const Bits& xp, int hx, int hxp) {
  if (b.size() != x.size() || x.size() != xp.size())
    throw Error(Err::LengthMismatch, "compute_B2: length mismatch");
  return ((d0 & dot2(b, xor_bits(x, xp))) ^ (hx & hxp)) & 1;
}

std::tuple<int, int, int> compute_L(int B1, int B2, int B1p, int B2p, int s1, int s2) {
  // The three digits of the octant N = 4*(B2' ^ B2 ^ B1(s1 ^ s2))
  // + 2*(B1' + B1(B2 ^ s2)) + B1 (mod 8). The middle term is an integer sum:
  // when B1' and B1(B2 ^ s2) are both set it carries into the pi digit. The
  // carry is forced: without it no physical three-wire circuit can realize
  // the map (the measured wires cannot see B1' when the second input is in
  // the computational set, yet the branch phase would have to depend on it).
  int mid = (B1p & 1) + (B1 & (B2 ^ s2) & 1);
  int L1 = (B2p ^ B2 ^ (B1 & (s1 ^ s2)) ^ (mid >> 1)) & 1;
  int L2 = mid & 1;
  int L3 = B1 & 1;
  return {L1, L2, L3};
}

PureState bb84_state(int B1, int B2) {
  PureState s(1);
  if (B1) {
    const double r = 1.0 / std::sqrt(2.0);
    s.amplitudes()[0] = cplx(r, 0);
    s.amplitudes()[1] = cplx(B2 ? -r : r, 0);
  } else {
    s = PureState::computational(1, uint64_t(B2 & 1));
  }
  return s;
}

PureState rotated_state(int B1p, int B2p) {
  if (!B1p) return PureState::computational(1, uint64_t(B2p & 1));
  return PureState::plus(AngleOctant(B2p ? 2 : 6));
}

PureState QFactory4Outcome::description_state() const {
  return basis == Basis::Standard ? bb84_state(B1, B2) : rotated_state(B1, B2);
}

QFactory4Outcome run_4states(const TrapdoorKeyPair& keys, const ServerBehavior& behavior,
                             Basis basis, Rng& rng, EngineChoice engine) {
  QFactory4Outcome out;
  out.basis = basis;
  append_round(out.transcript, 0, 'A', Bits{});  // key announcement, payload below
  out.transcript.messages.back().msg =
      Message::classical(u64_bytes(fnv1a(public_key_json(keys))));

  if (behavior.kind == ServerBehavior::Kind::Honest) {
    bool dense = engine.kind == EngineChoice::Kind::Dense ||
                 (engine.kind == EngineChoice::Kind::Auto &&
                  keys.family == TrapdoorKeyPair::Family::Toy && keys.toy.n <= 6);
    if (dense && keys.family != TrapdoorKeyPair::Family::Toy)
      throw Error(Err::NotSupported, "run_4states: dense engine needs the toy family");
    EngineOutput eo = dense ? dense_engine(keys, basis, rng) : structured_engine(keys, basis, rng);
    out.y = eo.y;
    out.b = eo.b;
    out.server_pure = eo.state;
    out.server_density = DensityMatrix::from_pure(eo.state);
  } else {
    if (keys.family != TrapdoorKeyPair::Family::Toy)
      throw Error(Err::NotSupported, "run_4states: scripted servers use the toy family");
    if (behavior.steps.size() != 2)
      throw Error(Err::ScheduleViolation, "run_4states: script must produce y then b");
    DensityMatrix reg;  // starts as the trivial (1) register
    std::vector<Bits> produced;
    for (const auto& step : behavior.steps) {
      auto res = run_instrument(step, reg, {}, rng);
      reg = res.post;
      Bits bits;
      for (char c : res.outcome) bits.push_back(uint8_t(c - '0'));
      produced.push_back(std::move(bits));
    }
    if (int(produced[0].size()) != keys.toy.n || int(produced[1].size()) != keys.toy.n)
      throw Error(Err::ScheduleViolation, "run_4states: scripted message width mismatch");
    out.y.bits = produced[0];
    out.b = produced[1];
    out.server_density = reg;
  }
  Bits y_wire = out.y.bits;
  if (y_wire.empty()) {
    std::vector<uint8_t> packed = out.y.to_bytes();
    y_wire.assign(packed.begin(), packed.end());
  }
  append_round(out.transcript, 1, 'B', y_wire);
  append_round(out.transcript, 2, 'B', out.b);
  derive_outcome(keys, basis, out.y, out.b, rng, out);
  return out;
}

QFactory8Outcome run_8states(const TrapdoorKeyPair& keys1, const TrapdoorKeyPair& keys2,
                             const ServerBehavior& behavior, Rng& rng, EngineChoice engine) {
  QFactory8Outcome out;
  if (behavior.kind == ServerBehavior::Kind::Honest) {
    out.sub_standard = run_4states(keys1, behavior, Basis::Standard, rng, engine);
    for (;;) {
      out.sub_rotated = run_4states(keys2, behavior, Basis::Rotated, rng, engine);
      if (!out.sub_rotated.rotated_off_axis) break;
      if (++out.rotated_retries > 200)
        throw Error(Err::Internal, "run_8states: rotated session retries exhausted");
    }
    auto [s1, s2, merged] =
        merge_gadget(*out.sub_standard.server_pure, *out.sub_rotated.server_pure, rng);
    out.s1 = s1;
    out.s2 = s2;
    out.server_pure = merged;
    out.server_density = DensityMatrix::from_pure(merged);
  } else {
    if (behavior.steps.size() != 5)
      throw Error(Err::ScheduleViolation, "run_8states: script must produce y,b,y',b',s1s2");
    ServerBehavior first{ServerBehavior::Kind::Scripted,
                         {behavior.steps[0], behavior.steps[1]}};
    ServerBehavior second{ServerBehavior::Kind::Scripted,
                          {behavior.steps[2], behavior.steps[3]}};
    out.sub_standard = run_4states(keys1, first, Basis::Standard, rng, engine);
    out.sub_rotated = run_4states(keys2, second, Basis::Rotated, rng, engine);
    DensityMatrix reg = out.sub_rotated.server_density;
    auto res = run_instrument(behavior.steps[4], reg, {}, rng);
    if (res.outcome.size() != 2)
      throw Error(Err::ScheduleViolation, "run_8states: merge script must emit two bits");
    out.s1 = res.outcome[0] - '0';
    out.s2 = res.outcome[1] - '0';
    out.server_density = res.post;
  }
  auto [L1, L2, L3] = compute_L(out.sub_standard.B1, out.sub_standard.B2, out.sub_rotated.B1,
                                out.sub_rotated.B2, out.s1, out.s2);
  out.L1 = L1;
  out.L2 = L2;
  out.L3 = L3;
  return out;
}

std::string session_record_json(const TrapdoorKeyPair& keys, const QFactory4Outcome& out) {
  nlohmann::json j;
  j["keys"] = hex_encode(u64_bytes(fnv1a(public_key_json(keys))));
  j["transcript"] = nlohmann::json::parse(out.transcript.to_json());
  j["outcome"] = {{"B1", out.B1},
                  {"B2", out.B2},
                  {"basis", out.basis == Basis::Standard ? "standard" : "rotated"},
                  {"not_two_preimages", out.not_two_preimages}};
  std::string amp_repr;
  for (const cplx& a : out.server_density.mat().v)
    amp_repr += std::to_string(int64_t(std::llround(a.real() * 1e9))) + "," +
                std::to_string(int64_t(std::llround(a.imag() * 1e9))) + ";";
  j["state_hash"] = hex_encode(u64_bytes(fnv1a(amp_repr)));
  return j.dump();
}

}  // namespace qfu
