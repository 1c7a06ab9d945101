#include "qfu/regev.hpp"

#include <cmath>

namespace qfu {

namespace {
int32_t modq(int64_t v, int32_t q) { return int32_t(((v % q) + q) % q); }
}  // namespace

Bits RegevCiphertext::to_bits(const RegevParams& p) const {
  int lg = 0;
  while ((int64_t(1) << lg) < p.q) ++lg;
  Bits out;
  out.reserve(size_t(p.n + 1) * lg);
  auto push = [&](int32_t v) {
    for (int i = 0; i < lg; ++i) out.push_back((uint32_t(v) >> i) & 1);
  };
  for (int32_t v : a) push(v);
  push(b);
  return out;
}

RegevKeyPair regev_keygen(const RegevParams& params, Rng& rng) {
  RegevKeyPair k;
  k.params = params;
  k.sk.resize(params.n);
  for (auto& v : k.sk) v = int32_t(rng.below(uint64_t(params.q)));
  k.pk_a.assign(params.m, std::vector<int32_t>(params.n));
  k.pk_b.resize(params.m);
  for (int i = 0; i < params.m; ++i) {
    int64_t acc = 0;
    for (int j = 0; j < params.n; ++j) {
      k.pk_a[i][j] = int32_t(rng.below(uint64_t(params.q)));
      acc += int64_t(k.pk_a[i][j]) * k.sk[j];
    }
    int32_t e = int32_t(rng.below(uint64_t(2 * params.noise + 1))) - params.noise;
    k.pk_b[i] = modq(acc + e, params.q);
  }
  return k;
}

RegevCiphertext regev_enc(const RegevKeyPair& keys, int message, Rng& rng) {
  const RegevParams& p = keys.params;
  RegevCiphertext ct;
  ct.a.assign(p.n, 0);
  int64_t b = 0;
  for (int i = 0; i < p.m; ++i) {
    if (!rng.next_bit()) continue;  // random subset sum of the public samples
    for (int j = 0; j < p.n; ++j) ct.a[j] = modq(int64_t(ct.a[j]) + keys.pk_a[i][j], p.q);
    b += keys.pk_b[i];
  }
  if (message & 1) b += p.q / 2;
  ct.b = modq(b, p.q);
  return ct;
}

int regev_dec(const RegevKeyPair& keys, const RegevCiphertext& ct) {
  const RegevParams& p = keys.params;
  int64_t acc = ct.b;
  for (int j = 0; j < p.n; ++j) acc -= int64_t(ct.a[j]) * keys.sk[j];
  int32_t v = modq(acc, p.q);
  if (v >= p.q / 2) v -= p.q;  // center to (-q/2, q/2]
  int32_t dist0 = std::abs(v);
  int32_t dist1 = std::abs(std::abs(v) - p.q / 2);
  // Ambiguity band around q/4.
  if (std::abs(dist0 - dist1) < p.q / 16)
    throw Error(Err::DecodeAmbiguous, "regev_dec: rounded value near q/4");
  return dist0 < dist1 ? 0 : 1;
}

}  // namespace qfu
