#pragma once

#include <vector>

#include "qfu/common.hpp"
#include "qfu/rng.hpp"

namespace qfu {

struct RegevParams {
  int n = 12;        // secret dimension
  int m = 64;        // public sample count
  int32_t q = 4093;  // modulus
  int32_t noise = 2; // per-sample noise magnitude bound
};

struct RegevCiphertext {
  std::vector<int32_t> a;  // n entries
  int32_t b = 0;

  // (n+1) * ceil(log2 q) bits, little-endian per coordinate.
  Bits to_bits(const RegevParams& p) const;
};

struct RegevKeyPair {
  RegevParams params;
  std::vector<std::vector<int32_t>> pk_a;  // m x n
  std::vector<int32_t> pk_b;               // m entries: A s + e
  std::vector<int32_t> sk;                 // s
};

RegevKeyPair regev_keygen(const RegevParams& params, Rng& rng);
RegevCiphertext regev_enc(const RegevKeyPair& keys, int message, Rng& rng);
// Throws DecodeAmbiguous when the rounded value is near q/4.
int regev_dec(const RegevKeyPair& keys, const RegevCiphertext& ct);

}  // namespace qfu
