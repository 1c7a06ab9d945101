#pragma once

#include <optional>

#include "qfu/density.hpp"
#include "qfu/instrument.hpp"
#include "qfu/state.hpp"
#include "qfu/transcript.hpp"
#include "qfu/trapdoor.hpp"

namespace qfu {

enum class Basis { Standard, Rotated };

// Honest server, or a scripted one whose instrument steps produce the
// server-to-client messages of the fixed schedule (y, then b; for the
// eight-state run additionally the second session's y, b and the merge
// outcomes). Scripted servers are supported for the toy family, whose range
// elements are plain bitstrings.
struct ServerBehavior {
  enum class Kind { Honest, Scripted };
  Kind kind = Kind::Honest;
  std::vector<QuantumInstrumentStep> steps;

  static ServerBehavior honest() { return {}; }
  static ServerBehavior scripted(std::vector<QuantumInstrumentStep> s) {
    return {Kind::Scripted, std::move(s)};
  }
  // Steps that deterministically emit the given fixed messages.
  static ServerBehavior fixed_messages(const std::vector<Bits>& messages);
};

struct QFactory4Outcome {
  Basis basis = Basis::Standard;
  RangePoint y;
  Bits b;
  int B1 = 0;
  int B2 = 0;
  bool not_two_preimages = false;
  // Rotated-basis sessions whose output falls outside {|0>,|1>,|+_{pi/2}>,
  // |-_{pi/2}>} (the preimage pair has even Hamming distance); the
  // eight-state driver retries these.
  bool rotated_off_axis = false;
  std::optional<PureState> server_pure;  // honest runs
  DensityMatrix server_density;          // always set
  Bits x0, x1;                           // client-side preimages (empty on cheat branch)
  Transcript transcript;

  // The state the client believes the server holds.
  PureState description_state() const;
};

struct QFactory8Outcome {
  int L1 = 0, L2 = 0, L3 = 0;
  int s1 = 0, s2 = 0;
  std::optional<PureState> server_pure;
  DensityMatrix server_density;
  QFactory4Outcome sub_standard;
  QFactory4Outcome sub_rotated;
  int rotated_retries = 0;

  AngleOctant angle() const { return AngleOctant(4 * L1 + 2 * L2 + L3); }
};

// B2 = (d0 * (b . (x xor x'))) xor h(x) h(x').
int compute_B2(int d0, const Bits& b, const Bits& x, const Bits& xp, int hx, int hxp);

// Digits of the octant N = 4*(B2' ^ B2 ^ B1(s1 ^ s2)) + 2*(B1' + B1(B2 ^ s2))
// + B1 (mod 8); the middle term is an integer sum whose carry lands in L1.
std::tuple<int, int, int> compute_L(int B1, int B2, int B1p, int B2p, int s1, int s2);

// The BB84 state H^{B1} X^{B2} |0>.
PureState bb84_state(int B1, int B2);
// The rotated-set state: |B2'> if B1' = 0, else |+_{pi/2 + (1 - B2') pi}>.
PureState rotated_state(int B1p, int B2p);

struct EngineChoice {
  enum class Kind { Auto, Dense, Structured };
  Kind kind = Kind::Auto;
};

QFactory4Outcome run_4states(const TrapdoorKeyPair& keys, const ServerBehavior& behavior,
                             Basis basis, Rng& rng, EngineChoice engine = {});

// The honest server's protocol messages (y, then b) and its remaining qubit,
// exposed so protocol converters can reuse the engines.
struct HonestServerReply {
  RangePoint y;
  Bits b;
  PureState state;
};
HonestServerReply honest_server_reply(const TrapdoorKeyPair& keys, Basis basis, Rng& rng,
                                      EngineChoice engine = {});

// Client-side outcome derivation from the server's reply (fills B1/B2 and the
// preimage fields of out; draws from rng only on the cheating branch).
void derive_outcome(const TrapdoorKeyPair& keys, Basis basis, const RangePoint& y, const Bits& b,
                    Rng& rng, QFactory4Outcome& out);

// A 64-bit fingerprint of the public part of the keys (used as the client's
// opening announcement in transcripts).
uint64_t public_key_fingerprint(const TrapdoorKeyPair& keys);

// Combines a BB84 state and a rotated-set state into |+_{L pi/4}>; s1, s2 are
// the X-basis outcomes of the two measured wires.
std::tuple<int, int, PureState> merge_gadget(const PureState& q1, const PureState& q2, Rng& rng);

// Exhaustive verification of the frozen merge circuit over all 16 honest
// input descriptions and all 4 measurement branches; returns the maximum
// deviation (branch-probability error or 1 - overlap).
double merge_gadget_max_error();

QFactory8Outcome run_8states(const TrapdoorKeyPair& keys1, const TrapdoorKeyPair& keys2,
                             const ServerBehavior& behavior, Rng& rng, EngineChoice engine = {});

// Session record (keys fingerprint, transcript, outcome bits, state hash).
std::string session_record_json(const TrapdoorKeyPair& keys, const QFactory4Outcome& out);

}  // namespace qfu
