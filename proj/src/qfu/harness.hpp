#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfu/cc.hpp"
#include "qfu/ubqc.hpp"

namespace qfu {

// ---------------------------------------------------------------------------
// Reports

struct GameReport {
  std::string game_id;
  int trials = 0;
  int wins = 0;
  double win_rate = 0;
  std::pair<double, double> ci95{0, 0};  // Wilson interval
  std::string notes;

  std::string to_json() const;
};

GameReport make_report(std::string game_id, int trials, int wins, std::string notes = "");

// ---------------------------------------------------------------------------
// Adaptive blindness game on brickwork UBQC: the adversary supplies two angle
// tables for the same graph, the challenger runs the blind protocol on a
// coin-picked table, the adversary sees the server-side view and guesses the
// coin.

struct BlindnessView {
  std::vector<AngleOctant> delta;         // sent measurement angles, node order
  Bits s;                                 // raw server outcomes
  std::vector<AngleOctant> leaked_theta;  // only populated in leak mode
};

using PhiTable = std::vector<std::vector<AngleOctant>>;  // [row][col]

struct BlindnessAdversary {
  std::function<std::pair<PhiTable, PhiTable>(int n, int m, Rng&)> choose;
  std::function<int(const BlindnessView&, Rng&)> guess;
  QubitSource source = QubitSource::QuantumChannel;
  ServerBehavior behavior = ServerBehavior::honest();  // the adversary's server play
  bool leak_theta = false;  // sanity leak-injection mode
};

GameReport blindness_game(const BlindnessAdversary& adversary, int n, int m, int trials,
                          Rng& rng);

// ---------------------------------------------------------------------------
// Single-qubit hybrid games 1..7. Game 1 is the real single-qubit protocol
// from the challenger's side; each later game applies one incremental rewrite
// (drop s, fold the pi digit into r, drop the second key pair, sample the
// pi/2 digit directly, drop the first key pair, drop delta, drop the phis).

struct HybridMessages {
  Bits y, b;    // first (index) session reply
  Bits yp, bp;  // second (rotated) session reply
  int s1 = 0, s2 = 0;
};

struct HybridAdversary {
  std::function<std::pair<AngleOctant, AngleOctant>(Rng&)> choose_phis;
  // Receives the public key pairs still present in the given game (null when
  // dropped) and returns the six server messages.
  std::function<HybridMessages(const TrapdoorKeyPair* keys1, const TrapdoorKeyPair* keys2,
                               Rng&)>
      respond;
  // delta is absent from game 6 on.
  std::function<int(const std::optional<AngleOctant>& delta, Rng&)> guess;
};

GameReport run_hybrid(int game_index, const HybridAdversary& adversary, int trials, Rng& rng);

// Plays the honest server inside the hybrid games and guesses at random.
HybridAdversary honest_hybrid_adversary(int toy_n = 4);

// Exhaustive challenger-message distribution equality for the exact rewrite
// transitions, enumerating all hidden bits at fixed coin. Zero tolerance.
bool verify_hybrid_rewrite_1_2();  // pi digit folds into the r pad
bool verify_hybrid_rewrite_3_4();  // B1' one-time-pads the pi/2 digit
bool verify_hybrid_rewrite_5_6_7();  // delta is uniform, hence droppable

// ---------------------------------------------------------------------------
// Basis-blindness estimators.

enum class BasisBlindKind { FourState, EightState };

struct BasisBlindView {
  const TrapdoorKeyPair* keys1 = nullptr;  // guessers may use public parts only
  const TrapdoorKeyPair* keys2 = nullptr;  // eight-state runs
  const Transcript* t1 = nullptr;
  const Transcript* t2 = nullptr;  // eight-state runs
  int s1 = 0, s2 = 0;              // merge outcomes (eight-state runs)
};

// Four-state: the guess is (B1, ignored); eight-state: (L2, L3).
using BasisGuesser = std::function<std::pair<int, int>(const BasisBlindView&, Rng&)>;

GameReport basis_blindness_estimate(BasisBlindKind kind, const BasisGuesser& guesser,
                                    int trials, Rng& rng);

// Recovers the toy trapdoor from a range collision by exhaustive domain
// enumeration and recomputes the hidden bits exactly like the client.
std::pair<int, int> brute_force_basis_guesser(const BasisBlindView& view, Rng& rng);

// ---------------------------------------------------------------------------
// Classical-converter emulation: replays a converter's instrument steps
// against a recorded transcript by branch-forced Kraus updates on matrices,
// never instantiating quantum registers. Each server ('B') message selects
// the branch of the next step; each step consumes as many classical input
// bits as its Kraus shape declares, taken in order from the client ('A')
// payloads seen so far. Throws TranscriptMismatch when the transcript cannot
// have been produced by the steps.
ClassicalDescription emulate_classical_converter(const std::vector<QuantumInstrumentStep>& steps,
                                                 const Transcript& transcript);

// The honest toy-family four-state server as two instrument steps (emit y,
// then emit b), for emulation cross-checks. Standard basis only.
std::vector<QuantumInstrumentStep> honest_toy_server_steps(const TrapdoorKeyPair& keys);

// ---------------------------------------------------------------------------
// Describability: how well a server-side describer can output the client's
// state description from the public transcript alone.

enum class DescriberTarget { QFactory4, QFactory8 };
enum class DescriberMethod { Trapdoor, BruteForce, Blind };

struct DescriberResult {
  double mean_overlap = 0;          // E[Tr(rho rho')]
  std::vector<double> overlaps;     // per trial
  std::string method_tag;
};

DescriberResult describability_attack(DescriberTarget target, DescriberMethod method,
                                      int trials, Rng& rng,
                                      TrapdoorKeyPair::Family family = TrapdoorKeyPair::Family::Toy);

// ---------------------------------------------------------------------------
// Best mean overlap achievable by a measure-and-prepare channel against the
// uniform ensemble {|+_{j pi/2}>}: grid over the equatorial measurement
// direction and the two prepared states, `grid_resolution` points per axis.
double cloning_bound_search(int grid_resolution);

// ---------------------------------------------------------------------------
// Signaling game: the challenger draws phi0 in Z pi/2 and emits nothing; the
// strategy guesses the class of phi0 mod pi. In leak mode phi0 is handed to
// the strategy (sanity check that the game detects information flow).

using SignalingStrategy = std::function<int(const std::optional<AngleOctant>& leaked_phi0,
                                            Rng&)>;

GameReport signaling_game(const SignalingStrategy& strategy, int trials, Rng& rng,
                          bool leak = false);

}  // namespace qfu
