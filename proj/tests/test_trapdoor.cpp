#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "qfu/regev.hpp"
#include "qfu/trapdoor.hpp"

using namespace qfu;

namespace {

Bits int_to_bits(uint64_t v, int n) {
  Bits b(n);
  for (int i = 0; i < n; ++i) b[i] = (v >> (n - 1 - i)) & 1;
  return b;
}

}  // namespace

TEST_CASE("toy family: exhaustive 2-regularity and hardcore identity at n=6") {
  Rng rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    auto keys = toy_gen(6, rng);
    REQUIRE(std::any_of(keys.toy.z.begin(), keys.toy.z.end(), [](uint8_t v) { return v; }));
    std::map<std::vector<uint8_t>, std::vector<Bits>> preimages;
    int first_xor = -1;
    for (uint64_t v = 0; v < 64; ++v) {
      Bits x = int_to_bits(v, 6);
      preimages[keys.eval(x).to_bytes()].push_back(x);
      Bits xz = xor_bits(x, keys.toy.z);
      int hx = keys.hardcore(x) ^ keys.hardcore(xz);
      if (first_xor < 0) first_xor = hx;
      CHECK(hx == first_xor);  // constant over all colliding pairs
    }
    CHECK(first_xor == keys.d0());
    CHECK(preimages.size() == 32);
    for (const auto& [y, xs] : preimages) CHECK(xs.size() == 2);
  }
}

TEST_CASE("toy family: invert recovers {x, x xor z}, ordered") {
  Rng rng(102);
  auto keys = toy_gen(6, rng);
  for (uint64_t v = 0; v < 64; ++v) {
    Bits x = int_to_bits(v, 6);
    auto pre = invert(keys, keys.eval(x));
    REQUIRE(pre.has_value());
    CHECK(pre->first < pre->second);
    CHECK(xor_bits(pre->first, pre->second) == keys.toy.z);
    CHECK((pre->first == x || pre->second == x));
  }
}

TEST_CASE("toy family: point outside the image has no preimages") {
  Rng rng(103);
  auto keys = toy_gen(6, rng);
  std::set<std::vector<uint8_t>> image;
  for (uint64_t v = 0; v < 64; ++v) image.insert(keys.eval(int_to_bits(v, 6)).to_bytes());
  int outside = 0;
  for (uint64_t v = 0; v < 64; ++v) {
    RangePoint y;
    y.bits = int_to_bits(v, 6);
    if (image.count(y.to_bytes())) continue;
    ++outside;
    CHECK_FALSE(invert(keys, y).has_value());
  }
  CHECK(outside == 32);
}

TEST_CASE("toy key JSON round trip") {
  Rng rng(104);
  auto keys = toy_gen(5, rng);
  auto back = TrapdoorKeyPair::from_json(keys.to_json());
  Bits x = int_to_bits(19, 5);
  CHECK(back.eval(x).bits == keys.eval(x).bits);
  CHECK(back.d0() == keys.d0());
  CHECK(back.toy.z == keys.toy.z);
}

TEST_CASE("lattice family: inversion over random domain points at desk params") {
  Rng rng(201);
  LweParams p;  // defaults n=12, q=4096, 3-bit noise
  auto keys = lwe_gen(p, rng);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    Bits x = random_domain_element(keys, rng);
    auto pre = invert(keys, keys.eval(x));
    REQUIRE(pre.has_value());
    CHECK((pre->first == x || pre->second == x));
    CHECK(pre->first < pre->second);
    // colliding pair has the constant hardcore XOR
    CHECK((keys.hardcore(pre->first) ^ keys.hardcore(pre->second)) == keys.d0());
    ++ok;
  }
  CHECK(ok == 1000);  // honest inversion rate 100% >= 99%
}

TEST_CASE("lattice family: hardcore-bit encoding decodes; q/2 flip flips it") {
  Rng rng(202);
  auto keys = lwe_gen(LweParams{}, rng);
  for (int i = 0; i < 1000; ++i) {
    int b = rng.next_bit();
    auto y0 = lwe_enc(keys, b, rng);
    CHECK(lwe_dec(keys, y0) == b);
    auto flipped = y0;
    flipped[0] = int32_t((flipped[0] + keys.lwe.q() / 2) % keys.lwe.q());
    CHECK(lwe_dec(keys, flipped) == (b ^ 1));
  }
}

TEST_CASE("lattice family: adversarial y without two preimages is rejected") {
  Rng rng(203);
  auto keys = lwe_gen(LweParams{}, rng);
  int rejected = 0;
  for (int i = 0; i < 200; ++i) {
    // Far-out range point: uniform junk almost surely fails the noise check.
    RangePoint y;
    y.coords.resize(keys.lwe.m);
    for (auto& v : y.coords) v = int32_t(rng.below(uint64_t(keys.lwe.q())));
    if (!invert(keys, y).has_value()) ++rejected;
  }
  CHECK(rejected == 200);
}

TEST_CASE("lattice family: d0 uniform over keys") {
  Rng rng(204);
  int ones = 0;
  for (int i = 0; i < 200; ++i) ones += lwe_gen(LweParams{}, rng).d0();
  CHECK(ones > 60);
  CHECK(ones < 140);
}

TEST_CASE("lattice key JSON round trip") {
  Rng rng(205);
  LweParams p;
  p.n = 4;
  p.kbits = 8;
  auto keys = lwe_gen(p, rng);
  auto back = TrapdoorKeyPair::from_json(keys.to_json());
  Bits x = random_domain_element(keys, rng);
  CHECK(back.eval(x).coords == keys.eval(x).coords);
  CHECK(back.d0() == keys.d0());
  auto pre = invert(back, back.eval(x));
  REQUIRE(pre.has_value());
  CHECK((pre->first == x || pre->second == x));
}

TEST_CASE("regev: correctness, probabilistic ciphertexts, format") {
  Rng rng(301);
  auto keys = regev_keygen(RegevParams{}, rng);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    for (int msg = 0; msg < 2; ++msg) {
      try {
        if (regev_dec(keys, regev_enc(keys, msg, rng)) != msg) ++failures;
      } catch (const Error&) {
        ++failures;  // DecodeAmbiguous counts as failure
      }
    }
  }
  CHECK(failures == 0);

  auto c1 = regev_enc(keys, 0, rng);
  auto c2 = regev_enc(keys, 0, rng);
  CHECK((c1.a != c2.a || c1.b != c2.b));

  int lg = 0;
  while ((1 << lg) < keys.params.q) ++lg;
  CHECK(c1.to_bits(keys.params).size() == size_t(keys.params.n + 1) * lg);
}

TEST_CASE("regev: naive keyless guesser has no advantage") {
  Rng rng(302);
  auto keys = regev_keygen(RegevParams{}, rng);
  int wins = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    int b = rng.next_bit();
    auto ct = regev_enc(keys, b, rng);
    // Naive guess: threshold on the ciphertext body.
    int guess = ct.b >= keys.params.q / 2 ? 1 : 0;
    wins += (guess == b);
  }
  double rate = double(wins) / trials;
  CHECK(std::abs(rate - 0.5) < 3 * 0.5 / std::sqrt(double(trials)));
}
