#include "qfu/cc.hpp"

#include <cmath>
#include <deque>

namespace qfu {

int Resource::put_state(PureState s) {
  registry_.push_back(std::move(s));
  return int(registry_.size()) - 1;
}

const PureState& Resource::get_state(int handle) const {
  if (handle < 0 || handle >= int(registry_.size()))
    throw Error(Err::BadIndex, "resource: unknown quantum handle");
  return registry_[size_t(handle)];
}

namespace {

// Converter attached to one interface of a resource. Cascades are resolved
// breadth-first in emission order, which keeps RNG consumption deterministic.
class AttachedResource : public Resource {
 public:
  AttachedResource(ConverterPtr conv, char iface, ResourcePtr inner)
      : conv_(std::move(conv)), iface_(iface), inner_(std::move(inner)) {
    if (iface_ != 'A' && iface_ != 'B') throw Error(Err::BadIndex, "attach: interface");
  }

  std::vector<Emission> start(Rng& rng) override {
    std::vector<Emission> out;
    route_resource(inner_->start(rng), out, rng);
    route_converter(conv_->start(rng), out, rng);
    return out;
  }

  std::vector<Emission> receive(char iface, const Message& m, Rng& rng) override {
    std::vector<Emission> out;
    if (iface == iface_)
      route_converter(conv_->from_outer(m, rng), out, rng);
    else
      route_resource(inner_->receive(iface, m, rng), out, rng);
    return out;
  }

  const PureState& get_state(int handle) const override { return inner_->get_state(handle); }

 private:
  void route_resource(const std::vector<Emission>& ems, std::vector<Emission>& out, Rng& rng) {
    for (const Emission& e : ems) {
      if (e.iface == iface_)
        route_converter(conv_->from_inner(e.msg, rng), out, rng);
      else
        out.push_back(e);
    }
  }
  void route_converter(const std::vector<ConverterEmission>& ems, std::vector<Emission>& out,
                       Rng& rng) {
    for (const ConverterEmission& e : ems) {
      if (e.to_inner)
        route_resource(inner_->receive(iface_, e.msg, rng), out, rng);
      else
        out.push_back({iface_, e.msg});
    }
  }

  ConverterPtr conv_;
  char iface_;
  ResourcePtr inner_;
};

class SerialConverter : public Converter {
 public:
  SerialConverter(ConverterPtr outer, ConverterPtr inner)
      : outer_(std::move(outer)), inner_(std::move(inner)) {}

  std::vector<ConverterEmission> start(Rng& rng) override {
    std::vector<ConverterEmission> out;
    // inner first (it sits closer to the resource), then outer
    for (const auto& e : inner_->start(rng)) route_from_inner_layer(e, out, rng);
    for (const auto& e : outer_->start(rng)) route_from_outer_layer(e, out, rng);
    return out;
  }
  std::vector<ConverterEmission> from_outer(const Message& m, Rng& rng) override {
    std::vector<ConverterEmission> out;
    for (const auto& e : outer_->from_outer(m, rng)) route_from_outer_layer(e, out, rng);
    return out;
  }
  std::vector<ConverterEmission> from_inner(const Message& m, Rng& rng) override {
    std::vector<ConverterEmission> out;
    for (const auto& e : inner_->from_inner(m, rng)) route_from_inner_layer(e, out, rng);
    return out;
  }

 private:
  // emission of the outer layer: outward surfaces; inward feeds the inner layer
  void route_from_outer_layer(const ConverterEmission& e, std::vector<ConverterEmission>& out,
                              Rng& rng) {
    if (!e.to_inner) {
      out.push_back(e);
      return;
    }
    for (const auto& f : inner_->from_outer(e.msg, rng)) route_from_inner_layer(f, out, rng);
  }
  void route_from_inner_layer(const ConverterEmission& e, std::vector<ConverterEmission>& out,
                              Rng& rng) {
    if (e.to_inner) {
      out.push_back(e);
      return;
    }
    for (const auto& f : outer_->from_inner(e.msg, rng)) route_from_outer_layer(f, out, rng);
  }

  ConverterPtr outer_, inner_;
};

class ParallelResource : public Resource {
 public:
  ParallelResource(ResourcePtr a, ResourcePtr b) : parts_{std::move(a), std::move(b)} {}

  std::vector<Emission> start(Rng& rng) override {
    std::vector<Emission> out;
    for (int i = 0; i < 2; ++i) tag(parts_[i]->start(rng), i, out);
    return out;
  }

  std::vector<Emission> receive(char iface, const Message& m, Rng& rng) override {
    if (m.kind != Message::Kind::Classical || m.payload.empty())
      throw Error(Err::BadIndex, "parallel: missing component prefix");
    int which = m.payload[0] & 1;
    Message stripped = m;
    stripped.payload.erase(stripped.payload.begin());
    std::vector<Emission> out;
    tag(parts_[which]->receive(iface, stripped, rng), which, out);
    return out;
  }

  const PureState& get_state(int handle) const override {
    return parts_[handle & 1]->get_state(handle >> 1);
  }

 private:
  void tag(const std::vector<Emission>& ems, int which, std::vector<Emission>& out) {
    for (Emission e : ems) {
      if (e.msg.kind == Message::Kind::QHandle) {
        e.msg = Message::quantum((e.msg.qhandle << 1) | which);
      } else {
        e.msg.payload.insert(e.msg.payload.begin(), uint8_t(which));
      }
      out.push_back(std::move(e));
    }
  }

  ResourcePtr parts_[2];
};

}  // namespace

ResourcePtr attach(ConverterPtr conv, char iface, ResourcePtr inner) {
  return std::make_shared<AttachedResource>(std::move(conv), iface, std::move(inner));
}

ConverterPtr compose_converters(ConverterPtr outer, ConverterPtr inner) {
  return std::make_shared<SerialConverter>(std::move(outer), std::move(inner));
}

ResourcePtr compose_parallel(ResourcePtr first, ResourcePtr second) {
  return std::make_shared<ParallelResource>(std::move(first), std::move(second));
}

ResourcePtr compose_serial(std::vector<ConverterPtr> at_a, ResourcePtr r,
                           std::vector<ConverterPtr> at_b) {
  // innermost converter attaches first
  for (auto it = at_b.rbegin(); it != at_b.rend(); ++it) r = attach(*it, 'B', r);
  for (auto it = at_a.rbegin(); it != at_a.rend(); ++it) r = attach(*it, 'A', r);
  return r;
}

Transcript run_session(Resource& r, const std::vector<SessionStep>& script, Rng& rng) {
  Transcript t;
  t.session = 0;
  int round = 0;
  auto record = [&](char from, const Message& m) { t.add(round++, from, m); };
  for (const Emission& e : r.start(rng)) record('R', e.msg);
  for (const SessionStep& step : script) {
    record(step.iface, step.msg);
    for (const Emission& e : r.receive(step.iface, step.msg, rng)) record('R', e.msg);
  }
  return t;
}

// --- ideal resources ---

std::vector<Emission> ClassicalChannel::receive(char iface, const Message& m, Rng&) {
  if (m.kind == Message::Kind::QHandle) return {{'A', err_message()}, {'B', err_message()}};
  return {{iface == 'A' ? 'B' : 'A', m}};
}

std::vector<Emission> SZpi2Resource::start(Rng& rng) {
  theta = AngleOctant(2 * int(rng.below(4)));
  int h = put_state(PureState::plus(theta));
  return {{'A', Message::classical({uint8_t(theta.k)})}, {'B', Message::quantum(h)}};
}

ResourcePtr ideal_s_zpi2() {
  return std::make_shared<SZpi2Resource>();
}

std::vector<Emission> RspVResource::receive(char iface, const Message& m, Rng& rng) {
  if (done_) return {};
  if (iface == 'A' && m.kind == Message::Kind::Classical && !m.payload.empty())
    basis = char(m.payload[0]);
  if (iface == 'B' && m.kind == Message::Kind::Classical && !m.payload.empty())
    c = m.payload[0] & 1;
  if (basis && c) return fire(rng);
  return {};
}

std::vector<Emission> RspVResource::fire(Rng& rng) {
  done_ = true;
  if (*c == 1) return {{'A', err_message()}, {'B', err_message()}};
  if (*basis == 'Z') {
    int b = rng.next_bit();
    int h = put_state(PureState::computational(1, uint64_t(b)));
    return {{'A', Message::classical({uint8_t(b)})}, {'B', Message::quantum(h)}};
  }
  if (*basis == 'X') {
    AngleOctant th(int(rng.below(8)));
    int h = put_state(PureState::plus(th));
    return {{'A', Message::classical({uint8_t(th.k)})}, {'B', Message::quantum(h)}};
  }
  throw Error(Err::BadIndex, "rsp-v: basis letter must be 'Z' or 'X'");
}

ResourcePtr ideal_rsp_v() {
  return std::make_shared<RspVResource>();
}

int ideal_s_ubqc1(AngleOctant phi, int c, const Ubqc1Deviation* deviation, Rng& rng) {
  if (c == 0) {
    // Measuring |+> at angle phi: outcome 0 with probability cos^2(phi/2).
    double p0 = std::cos(phi.radians() / 2);
    p0 *= p0;
    return rng.next_double() < p0 ? 0 : 1;
  }
  if (!deviation) throw Error(Err::MissingDeviation, "ideal_s_ubqc1: c = 1 needs a deviation");
  Bits phi_bits = {uint8_t((phi.k >> 2) & 1), uint8_t((phi.k >> 1) & 1), uint8_t(phi.k & 1)};
  InstrumentResult res = run_instrument(deviation->xi, deviation->rho, phi_bits, rng);
  if (res.outcome.empty()) throw Error(Err::ScheduleViolation, "ideal_s_ubqc1: empty outcome");
  return res.outcome.back() == '1';
}

Rsp4Session ideal_rsp4_cc(int c, const Rsp4Deviation* deviation, Rng& rng) {
  Rsp4Session ses;
  ses.c = c;
  ses.right_state = PureState(1);
  if (c == 0) {
    ses.B1 = rng.next_bit();
    ses.B2 = rng.next_bit();
    ses.right_state = bb84_state(ses.B1, ses.B2);
    return ses;
  }
  TrapdoorKeyPair keys = lwe_gen({}, rng);
  ses.B1 = keys.d0();
  ses.y0 = lwe_enc(keys, ses.B1, rng);
  if (deviation) {
    auto [y, b] = deviation->reply(keys, ses.y0);
    QFactory4Outcome out;
    out.basis = Basis::Standard;
    derive_outcome(keys, Basis::Standard, y, b, rng, out);
    ses.B2 = out.B2;
    ses.not_two_preimages = out.not_two_preimages;
    ses.right_state = bb84_state(out.B1, out.B2);
  } else {
    QFactory4Outcome out = run_4states(keys, ServerBehavior::honest(), Basis::Standard, rng);
    ses.B2 = out.B2;
    ses.not_two_preimages = out.not_two_preimages;
    ses.right_state = out.server_pure ? *out.server_pure : bb84_state(out.B1, out.B2);
  }
  ses.keys = std::move(keys);
  return ses;
}

// --- advantage estimation ---

std::pair<double, double> wilson_interval(int wins, int trials) {
  if (trials <= 0) return {0, 1};
  const double z = 1.959963984540054;
  const double n = trials;
  const double p = double(wins) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

AdvantageEstimate estimate_advantage(const Distinguisher& d, const ResourceFactory& sys_a,
                                     const ResourceFactory& sys_b, int trials, Rng& rng) {
  if (trials < 100) throw Error(Err::EmptySet, "estimate_advantage: trials must be >= 100");
  AdvantageEstimate est;
  est.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng trial = rng.split(uint64_t(t) | (uint64_t(1) << 40));
    int which = trial.next_bit();
    ResourcePtr sys = which ? sys_b(trial) : sys_a(trial);
    int guess = d(*sys, trial);
    if (guess == which) ++est.wins;
  }
  double p = double(est.wins) / trials;
  est.advantage = std::clamp(2 * p - 1, -1.0, 1.0);
  auto [lo, hi] = wilson_interval(est.wins, trials);
  est.ci95 = {2 * lo - 1, 2 * hi - 1};
  return est;
}

// --- four-state protocol converters ---

std::vector<ConverterEmission> QFactoryClientConverter::start(Rng&) {
  std::vector<uint8_t> fp(8);
  uint64_t v = public_key_fingerprint(keys_);
  for (int i = 0; i < 8; ++i) fp[i] = (v >> (8 * i)) & 0xff;
  return {{true, Message::classical(fp)}};
}

std::vector<ConverterEmission> QFactoryClientConverter::from_inner(const Message& m, Rng& rng) {
  if (m.kind != Message::Kind::Classical) return {};
  if (!y_) {
    y_ = RangePoint::from_bytes(m.payload);
    return {};
  }
  QFactory4Outcome out;
  out.basis = basis_;
  out.y = *y_;
  out.b = m.as_bits();
  derive_outcome(keys_, basis_, out.y, out.b, rng, out);
  outcome = std::move(out);
  // announce completion outward with the outcome bits
  return {{false, Message::classical({uint8_t(outcome->B1), uint8_t(outcome->B2)})}};
}

std::vector<ConverterEmission> QFactoryServerConverter::from_inner(const Message& m, Rng& rng) {
  if (m.kind != Message::Kind::Classical) return {};
  HonestServerReply reply = honest_server_reply(keys_, basis_, rng);
  held_state = std::move(reply.state);
  std::vector<uint8_t> ybytes = reply.y.to_bytes();
  return {{true, Message::classical(ybytes)}, {true, Message::classical_bits(reply.b)}};
}

}  // namespace qfu
