#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "qfu/qfactory.hpp"

namespace qfu {

// ---------------------------------------------------------------------------
// Two-interface resources. A resource reacts to messages arriving at its A
// (left) or B (right) interface by emitting messages at either interface.
// Quantum payloads travel as handles into the resource's state registry, so a
// purely classical resource can refuse them outright.
// ---------------------------------------------------------------------------

struct Emission {
  char iface;  // 'A' or 'B'
  Message msg;
};

class Resource {
 public:
  virtual ~Resource() = default;
  virtual std::vector<Emission> start(Rng& rng) { return {}; }
  virtual std::vector<Emission> receive(char iface, const Message& m, Rng& rng) = 0;

  int put_state(PureState s);
  virtual const PureState& get_state(int handle) const;

 private:
  std::vector<PureState> registry_;
};

using ResourcePtr = std::shared_ptr<Resource>;

// A converter sits on one interface: outer messages come from the
// environment, inner messages from the attached resource.
struct ConverterEmission {
  bool to_inner;
  Message msg;
};

class Converter {
 public:
  virtual ~Converter() = default;
  virtual std::vector<ConverterEmission> start(Rng& rng) { return {}; }
  virtual std::vector<ConverterEmission> from_outer(const Message& m, Rng& rng) = 0;
  virtual std::vector<ConverterEmission> from_inner(const Message& m, Rng& rng) = 0;
};

using ConverterPtr = std::shared_ptr<Converter>;

// Forwards both ways; does nothing else.
class IdentityConverter : public Converter {
 public:
  std::vector<ConverterEmission> from_outer(const Message& m, Rng&) override {
    return {{true, m}};
  }
  std::vector<ConverterEmission> from_inner(const Message& m, Rng&) override {
    return {{false, m}};
  }
};

// The honest-activation filter: sends the bit c = 0 inward once, then
// forwards transparently.
class FilterConverter : public Converter {
 public:
  std::vector<ConverterEmission> start(Rng&) override {
    return {{true, Message::classical({0})}};
  }
  std::vector<ConverterEmission> from_outer(const Message& m, Rng&) override {
    return {{true, m}};
  }
  std::vector<ConverterEmission> from_inner(const Message& m, Rng&) override {
    return {{false, m}};
  }
};

// attach(conv, 'A', R) is the resource conv∘R (converter on the A side).
ResourcePtr attach(ConverterPtr conv, char iface, ResourcePtr inner);

// Serial composition of two converters on the same interface: outer goes
// through `outer` first, then `inner`.
ConverterPtr compose_converters(ConverterPtr outer, ConverterPtr inner);

// Parallel composition. Interface payloads gain a one-byte component prefix
// (0 = first, 1 = second); emissions are prefixed likewise. Start order:
// first component, then second.
ResourcePtr compose_parallel(ResourcePtr first, ResourcePtr second);

// Serial protocol composition around a resource: converter stacks at A and B
// (outermost first), i.e. piA ∘ R ∘ piB.
ResourcePtr compose_serial(std::vector<ConverterPtr> at_a, ResourcePtr r,
                           std::vector<ConverterPtr> at_b);

// ---------------------------------------------------------------------------
// Session driving
// ---------------------------------------------------------------------------

struct SessionStep {
  char iface;  // where the environment injects
  Message msg;
};

// Runs start, then the scripted injections, recording everything that
// surfaces at the outer interfaces (driven messages from 'A'/'B', resource
// emissions from 'R').
Transcript run_session(Resource& r, const std::vector<SessionStep>& script, Rng& rng);

// ---------------------------------------------------------------------------
// The ideal resources
// ---------------------------------------------------------------------------

// Forwards classical messages between A and B; answers any quantum handle
// with ERR at both interfaces.
class ClassicalChannel : public Resource {
 public:
  std::vector<Emission> receive(char iface, const Message& m, Rng& rng) override;
};

// Picks theta uniformly from the pi/2 grid {0, 2, 4, 6}; sends theta to A
// and |+_theta> (as a handle) to B at start.
class SZpi2Resource : public Resource {
 public:
  std::vector<Emission> start(Rng& rng) override;
  std::vector<Emission> receive(char, const Message&, Rng&) override { return {}; }
  AngleOctant theta;
};
ResourcePtr ideal_s_zpi2();

// Verifiable remote state preparation: A supplies the basis letter ('Z' or
// 'X'), B supplies the activation bit c. c = 1 yields ERR on both sides;
// otherwise A learns the description and B receives the state.
class RspVResource : public Resource {
 public:
  std::vector<Emission> receive(char iface, const Message& m, Rng& rng) override;
  std::optional<char> basis;  // 'Z' | 'X'
  std::optional<int> c;

 private:
  std::vector<Emission> fire(Rng& rng);
  bool done_ = false;
};
ResourcePtr ideal_rsp_v();

// Single-qubit ideal blind computation: honest branch measures |+> at angle
// phi; the filtered branch runs the supplied deviation instrument on
// (rho, phi) and reports its outcome bit.
struct Ubqc1Deviation {
  QuantumInstrumentStep xi;
  DensityMatrix rho;
};
int ideal_s_ubqc1(AngleOctant phi, int c, const Ubqc1Deviation* deviation, Rng& rng);

// Four-state remote state preparation over a classical channel, with the
// honest branch (c = 0) drawing a fresh BB84 description and the leaky
// branch (c = 1) running the LWE-keyed protocol: the right side sees the
// public key and the encryption of B1, and may steer B2 through a deviation
// that fabricates the server reply (y, b).
struct Rsp4Deviation {
  std::function<std::pair<RangePoint, Bits>(const TrapdoorKeyPair& keys,
                                            const std::vector<int32_t>& y0)> reply;
};
struct Rsp4Session {
  int c = 0;
  int B1 = 0;
  int B2 = 0;
  PureState right_state;
  std::optional<TrapdoorKeyPair> keys;  // c = 1 only
  std::vector<int32_t> y0;              // Enc(B1), c = 1 only
  bool not_two_preimages = false;
};
Rsp4Session ideal_rsp4_cc(int c, const Rsp4Deviation* deviation, Rng& rng);

// ---------------------------------------------------------------------------
// Distinguishing advantage
// ---------------------------------------------------------------------------

struct AdvantageEstimate {
  int trials = 0;
  int wins = 0;
  double advantage = 0;
  std::pair<double, double> ci95{0, 0};
};

std::pair<double, double> wilson_interval(int wins, int trials);

using ResourceFactory = std::function<ResourcePtr(Rng&)>;
// Returns the distinguisher's guess: 0 = first system, 1 = second.
using Distinguisher = std::function<int(Resource&, Rng&)>;

AdvantageEstimate estimate_advantage(const Distinguisher& d, const ResourceFactory& sys_a,
                                     const ResourceFactory& sys_b, int trials, Rng& rng);

// ---------------------------------------------------------------------------
// The four-state protocol pair as converters over a classical channel
// ---------------------------------------------------------------------------

class QFactoryClientConverter : public Converter {
 public:
  QFactoryClientConverter(TrapdoorKeyPair keys, Basis basis)
      : keys_(std::move(keys)), basis_(basis) {}
  std::vector<ConverterEmission> start(Rng& rng) override;
  std::vector<ConverterEmission> from_outer(const Message&, Rng&) override { return {}; }
  std::vector<ConverterEmission> from_inner(const Message& m, Rng& rng) override;

  std::optional<QFactory4Outcome> outcome;

 private:
  TrapdoorKeyPair keys_;
  Basis basis_;
  std::optional<RangePoint> y_;
};

class QFactoryServerConverter : public Converter {
 public:
  QFactoryServerConverter(TrapdoorKeyPair keys, Basis basis)
      : keys_(std::move(keys)), basis_(basis) {}
  std::vector<ConverterEmission> from_outer(const Message&, Rng&) override { return {}; }
  std::vector<ConverterEmission> from_inner(const Message& m, Rng& rng) override;

  std::optional<PureState> held_state;

 private:
  TrapdoorKeyPair keys_;
  Basis basis_;
};

}  // namespace qfu
