#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qfu/common.hpp"
#include "qfu/rng.hpp"

namespace qfu {

// A point in the range of a family function. The toy family uses GF(2)
// vectors (bits); the lattice family uses vectors mod q (coords).
struct RangePoint {
  Bits bits;
  std::vector<int32_t> coords;

  bool operator==(const RangePoint& o) const { return bits == o.bits && coords == o.coords; }
  std::vector<uint8_t> to_bytes() const;
  static RangePoint from_bytes(const std::vector<uint8_t>& data);
};

// f_k(x) = A x over GF(2) with kernel exactly {0, z}; h_k(x) = <c, x>.
struct ToyKey {
  int n = 0;                      // domain bits
  std::vector<Bits> a_rows;       // n x n matrix, rank n-1
  Bits c;                         // public hardcore vector
  Bits z;                         // secret kernel element (trapdoor)
};

// f(c, s, e) = K s + e + c * y_f mod q over Z_q, q = 2^kbits, where
// K = [A; R A + G] carries a gadget trapdoor R and y_f = K s0. The domain is
// x = (c, s, e) with s in Z_q^n and e bounded noise; the second preimage of
// f(0, s, e) is (1, s - s0, e), so every image point has exactly two
// preimages. The hardcore predicate h(x) = <w, s mod 2> satisfies
// h(x) xor h(x') = <w, s0 mod 2> = d0 because q is even.
struct LweKey {
  int n = 0;       // secret length
  int kbits = 0;   // q = 2^kbits
  int ebits = 0;   // noise entries in [-2^{ebits-1}, 2^{ebits-1} - 1]
  int m = 0;       // rows: n + n*kbits
  std::vector<std::vector<int32_t>> k_mat;  // m x n public matrix
  std::vector<int32_t> y_f;                 // K s0 (public, defines f)
  Bits w;                                   // public hardcore vector
  // trapdoor
  std::vector<std::vector<int8_t>> r_mat;   // (n*kbits) x n, entries -1/0/1
  std::vector<int32_t> s0;

  int32_t q() const { return int32_t(1) << kbits; }
  int32_t noise_bound() const { return int32_t(1) << (ebits - 1); }
};

struct TrapdoorKeyPair {
  enum class Family { Toy, Lwe };
  Family family = Family::Toy;
  ToyKey toy;
  LweKey lwe;

  int domain_bits() const;
  // f_k on the bit-encoded domain element.
  RangePoint eval(const Bits& x) const;
  // hardcore predicate h_k (public).
  int hardcore(const Bits& x) const;
  // d0, derived from the trapdoor alone.
  int d0() const;

  std::string to_json() const;
  static TrapdoorKeyPair from_json(const std::string& text);
};

struct LweParams {
  int n = 12;
  int kbits = 12;  // q = 4096
  int ebits = 3;
};

TrapdoorKeyPair toy_gen(int n, Rng& rng);
TrapdoorKeyPair lwe_gen(const LweParams& params, Rng& rng);

// Both preimages of y, lexicographically ordered by domain encoding;
// nullopt when y does not have exactly two well-formed preimages.
std::optional<std::pair<Bits, Bits>> invert(const TrapdoorKeyPair& keys, const RangePoint& y);

// Hardcore-bit encoding y0 = K s' + e' + b*(q/2, 0, ..., 0)^T with fresh
// randomness, decodable with the trapdoor.
std::vector<int32_t> lwe_enc(const TrapdoorKeyPair& keys, int b, Rng& rng);
int lwe_dec(const TrapdoorKeyPair& keys, const std::vector<int32_t>& y0);

// Uniform domain element (server-side superposition support).
Bits random_domain_element(const TrapdoorKeyPair& keys, Rng& rng);

}  // namespace qfu
