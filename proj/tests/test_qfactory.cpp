#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>

#include "qfu/qfactory.hpp"

using namespace qfu;

namespace {

double fidelity(const PureState& a, const PureState& b) {
  cplx ip(0, 0);
  REQUIRE(a.amplitudes().size() == b.amplitudes().size());
  for (size_t i = 0; i < a.amplitudes().size(); ++i)
    ip += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  return std::abs(ip);
}

}  // namespace

TEST_CASE("value-bit formula: direct substitutions") {
  // product term vanishes when d0 = 0
  CHECK(compute_B2(0, {1, 1}, {0, 1}, {1, 0}, 1, 1) == 1);
  // d0 = 1 and b.(x ^ x') = 1 with h(x)h(x') = 0
  CHECK(compute_B2(1, {1, 0}, {0, 0}, {1, 0}, 1, 0) == 1);
  CHECK(compute_B2(0, {0, 0}, {0, 0}, {0, 0}, 0, 0) == 0);
}

TEST_CASE("value-bit formula: invariant under preimage swap") {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    int n = 3 + int(rng.below(6));
    Bits b(n), x(n), xp(n);
    for (int i = 0; i < n; ++i) {
      b[i] = uint8_t(rng.next_bit());
      x[i] = uint8_t(rng.next_bit());
      xp[i] = uint8_t(rng.next_bit());
    }
    int d0 = int(rng.next_bit());
    int hx = int(rng.next_bit());
    int hxp = int(rng.next_bit());
    CHECK(compute_B2(d0, b, x, xp, hx, hxp) == compute_B2(d0, b, xp, x, hxp, hx));
  }
}

TEST_CASE("value-bit formula: mismatched lengths are rejected") {
  CHECK_THROWS_AS(compute_B2(1, {1, 0, 1}, {0, 1}, {1, 0}, 0, 1), Error);
}

TEST_CASE("angle recombination formula") {
  CHECK(compute_L(0, 0, 0, 0, 0, 0) == std::make_tuple(0, 0, 0));
  // middle digit 1 + (0^1)*1 = 2: carries into the pi digit.
  // N = 4*(1^0^1^1) + 2*0 + 1 = 5 -> (1, 0, 1)
  CHECK(compute_L(1, 0, 1, 1, 0, 1) == std::make_tuple(1, 0, 1));
  // without a carry the middle term reduces to the plain XOR
  CHECK(compute_L(1, 1, 0, 1, 1, 0) ==
        std::make_tuple(1 ^ 1 ^ (1 ^ 0), (1 ^ 0) & 1, 1));
  // with B1 = 0 the products vanish
  for (int code = 0; code < 32; ++code) {
    int B2 = code & 1, B1p = (code >> 1) & 1, B2p = (code >> 2) & 1;
    int s1 = (code >> 3) & 1, s2 = (code >> 4) & 1;
    CHECK(compute_L(0, B2, B1p, B2p, s1, s2) == std::make_tuple(B2p ^ B2, B1p, 0));
  }
}

TEST_CASE("four-state run, toy family: output equals the described BB84 state") {
  int d0_zero_seen = 0, plus_seen = 0;
  for (int seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    auto keys = toy_gen(6, rng);
    auto out = run_4states(keys, ServerBehavior::honest(), Basis::Standard, rng);
    REQUIRE(out.server_pure.has_value());
    CHECK(!out.not_two_preimages);
    CHECK(fidelity(*out.server_pure, bb84_state(out.B1, out.B2)) ==
          doctest::Approx(1.0).epsilon(1e-9));
    // formula cross-check from the revealed preimages
    int hx0 = keys.hardcore(out.x0);
    int hx1 = keys.hardcore(out.x1);
    CHECK(out.B1 == (hx0 ^ hx1));
    CHECK(out.B1 == keys.d0());
    CHECK(out.B2 == compute_B2(keys.d0(), out.b, out.x0, out.x1, hx0, hx1));
    if (out.B1 == 0) {
      // computational output |h(x)>
      CHECK(fidelity(*out.server_pure, PureState::computational(1, uint64_t(hx0))) ==
            doctest::Approx(1.0).epsilon(1e-9));
      ++d0_zero_seen;
    } else if (out.B2 == 0) {
      // d0 = 1 with even b.(x ^ x') gives |+>
      CHECK(fidelity(*out.server_pure, PureState::plus(AngleOctant(0))) ==
            doctest::Approx(1.0).epsilon(1e-9));
      ++plus_seen;
    }
  }
  CHECK(d0_zero_seen > 0);
  CHECK(plus_seen > 0);
}

TEST_CASE("dense and structured engines agree in distribution on the toy family") {
  Rng kr(11);
  auto keys = toy_gen(3, kr);
  auto sample = [&](EngineChoice::Kind kind, uint64_t seed0) {
    std::map<std::pair<int, int>, double> freq;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
      Rng rng(seed0 + t);
      auto out = run_4states(keys, ServerBehavior::honest(), Basis::Standard, rng, {kind});
      CHECK(fidelity(*out.server_pure, bb84_state(out.B1, out.B2)) ==
            doctest::Approx(1.0).epsilon(1e-9));
      freq[{out.B1, out.B2}] += 1.0 / trials;
    }
    return freq;
  };
  auto dense = sample(EngineChoice::Kind::Dense, 100000);
  auto structured = sample(EngineChoice::Kind::Structured, 200000);
  double tv = 0;
  for (int B1 = 0; B1 < 2; ++B1)
    for (int B2 = 0; B2 < 2; ++B2) {
      auto k = std::make_pair(B1, B2);
      double a = dense.count(k) ? dense[k] : 0.0;
      double b = structured.count(k) ? structured[k] : 0.0;
      tv += std::abs(a - b);
    }
  CHECK(tv / 2 <= 0.03);
}

TEST_CASE("rotated four-state run lands in the rotated set unless flagged off-axis") {
  int on_axis = 0;
  for (int seed = 0; seed < 300; ++seed) {
    Rng rng(7000 + seed);
    auto keys = toy_gen(5, rng);
    auto out = run_4states(keys, ServerBehavior::honest(), Basis::Rotated, rng);
    REQUIRE(out.server_pure.has_value());
    if (out.rotated_off_axis) continue;
    ++on_axis;
    CHECK(fidelity(*out.server_pure, rotated_state(out.B1, out.B2)) ==
          doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(on_axis > 50);
}

TEST_CASE("merge circuit: exhaustive verification over descriptions and branches") {
  auto start = std::chrono::steady_clock::now();
  CHECK(merge_gadget_max_error() < 1e-9);
  auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration_cast<std::chrono::seconds>(elapsed).count() < 10);
}

TEST_CASE("merge circuit: trivial all-zero description yields |+> on branch (0,0)") {
  // sample until the (0,0) branch comes up; it must then be exactly |+>
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto [s1, s2, out] = merge_gadget(bb84_state(0, 0), rotated_state(0, 0), rng);
    auto [L1, L2, L3] = compute_L(0, 0, 0, 0, s1, s2);
    CHECK(fidelity(out, PureState::plus(AngleOctant(4 * L1 + 2 * L2 + L3))) ==
          doctest::Approx(1.0).epsilon(1e-9));
    if (s1 == 0 && s2 == 0)
      CHECK(fidelity(out, PureState::plus(AngleOctant(0))) ==
            doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("merge circuit: deterministic replay under the same seed") {
  Rng r1(99), r2(99);
  auto [a1, a2, aout] = merge_gadget(bb84_state(1, 1), rotated_state(1, 0), r1);
  auto [b1, b2, bout] = merge_gadget(bb84_state(1, 1), rotated_state(1, 0), r2);
  CHECK(a1 == b1);
  CHECK(a2 == b2);
  CHECK(fidelity(aout, bout) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eight-state run, toy family: output matches the recombined angle") {
  std::map<int, int> l3_counts;
  for (int seed = 0; seed < 1000; ++seed) {
    Rng rng(30000 + seed);
    auto k1 = toy_gen(4, rng);
    // The rotated sub-session only lands in the rotated set when the kernel
    // element has odd weight (the branch-phase parity is fixed by the key),
    // so draw the second pair until that holds.
    auto k2 = toy_gen(4, rng);
    while (std::count(k2.toy.z.begin(), k2.toy.z.end(), 1) % 2 == 0) k2 = toy_gen(4, rng);
    auto out = run_8states(k1, k2, ServerBehavior::honest(), rng);
    REQUIRE(out.server_pure.has_value());
    CHECK(fidelity(*out.server_pure, PureState::plus(out.angle())) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(out.L3 == out.sub_standard.B1);
    l3_counts[out.L3]++;
  }
  // L3 = d0 of the first key pair: uniform within 3 sigma of 1000 coin flips
  double dev = std::abs(l3_counts[1] - 500.0);
  CHECK(dev <= 3 * std::sqrt(1000.0 * 0.25));
}

TEST_CASE("scripted server: fixed messages drive the client without crashing") {
  Rng rng(5150);
  auto keys = toy_gen(4, rng);
  // honest-looking y: the image of a known point; b arbitrary
  Bits x = {1, 0, 1, 0};
  Bits y = keys.eval(x).bits;
  Bits b = {0, 1, 1, 0};
  auto out = run_4states(keys, ServerBehavior::fixed_messages({y, b}), Basis::Standard, rng);
  CHECK(!out.not_two_preimages);
  CHECK((out.B1 == 0 || out.B1 == 1));
  CHECK((out.B2 == 0 || out.B2 == 1));
  CHECK(out.transcript.messages.size() == 3);

  // a point outside the image takes the cheating branch
  Rng rng2(5151);
  Bits bad_y = y;
  // flipping one output bit of a rank n-1 map leaves the image for half the
  // kernel cosets; search for one that actually has no preimage
  bool found_bad = false;
  for (int flip = 0; flip < 4 && !found_bad; ++flip) {
    Bits cand = y;
    cand[flip] ^= 1;
    RangePoint p;
    p.bits = cand;
    if (!invert(keys, p)) {
      bad_y = cand;
      found_bad = true;
    }
  }
  REQUIRE(found_bad);
  auto cheat = run_4states(keys, ServerBehavior::fixed_messages({bad_y, b}), Basis::Standard,
                           rng2);
  CHECK(cheat.not_two_preimages);
  CHECK(cheat.B1 == keys.d0());
}

TEST_CASE("scripted server: wrong schedule length is a violation") {
  Rng rng(6);
  auto keys = toy_gen(4, rng);
  CHECK_THROWS_AS(
      run_4states(keys, ServerBehavior::fixed_messages({{1, 0, 1, 0}}), Basis::Standard, rng),
      Error);
  CHECK_THROWS_AS(run_8states(keys, keys, ServerBehavior::fixed_messages({{1, 0, 1, 0}}), rng),
                  Error);
}

TEST_CASE("lattice family: honest sessions are correct") {
  int ok = 0, total = 0, aborts = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    Rng rng(90000 + seed);
    auto keys = lwe_gen({}, rng);
    auto out = run_4states(keys, ServerBehavior::honest(), Basis::Standard, rng);
    if (out.not_two_preimages) {
      ++aborts;
      continue;
    }
    ++total;
    if (fidelity(*out.server_pure, bb84_state(out.B1, out.B2)) > 1.0 - 1e-9) ++ok;
  }
  REQUIRE(total > 0);
  CHECK(double(ok) / total >= 0.99);
  CHECK(aborts < 100);
}

TEST_CASE("session record serializes the outcome") {
  Rng rng(31);
  auto keys = toy_gen(4, rng);
  auto out = run_4states(keys, ServerBehavior::honest(), Basis::Standard, rng);
  std::string rec = session_record_json(keys, out);
  CHECK(rec.find("\"keys\"") != std::string::npos);
  CHECK(rec.find("\"transcript\"") != std::string::npos);
  CHECK(rec.find("\"B1\"") != std::string::npos);
  CHECK(rec.find("\"state_hash\"") != std::string::npos);
}
