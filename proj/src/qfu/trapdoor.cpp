#include "qfu/trapdoor.hpp"

#include <algorithm>

#include <json.hpp>

namespace qfu {

namespace {

using nlohmann::json;

// ---- toy family helpers ----

int row_dot(const Bits& row, const Bits& x) { return dot2(row, x); }

// Solves A x = y over GF(2). Returns one solution with the single free
// variable set to 0, or nullopt if inconsistent.
std::optional<Bits> solve_gf2(const std::vector<Bits>& a_rows, const Bits& y, int n) {
  std::vector<Bits> m = a_rows;
  Bits rhs = y;
  std::vector<int> pivot_col(m.size(), -1);
  int row = 0;
  for (int col = 0; col < n && row < int(m.size()); ++col) {
    int sel = -1;
    for (int r = row; r < int(m.size()); ++r)
      if (m[r][col]) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[sel], m[row]);
    std::swap(rhs[sel], rhs[row]);
    for (int r = 0; r < int(m.size()); ++r) {
      if (r != row && m[r][col]) {
        m[r] = xor_bits(m[r], m[row]);
        rhs[r] ^= rhs[row];
      }
    }
    pivot_col[row] = col;
    ++row;
  }
  for (int r = row; r < int(m.size()); ++r)
    if (rhs[r]) return std::nullopt;
  Bits x(n, 0);
  for (int r = 0; r < row; ++r) x[pivot_col[r]] = rhs[r];
  return x;
}

int gf2_rank(std::vector<Bits> m, int n) {
  int row = 0;
  for (int col = 0; col < n && row < int(m.size()); ++col) {
    int sel = -1;
    for (int r = row; r < int(m.size()); ++r)
      if (m[r][col]) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[sel], m[row]);
    for (int r = row + 1; r < int(m.size()); ++r)
      if (m[r][col]) m[r] = xor_bits(m[r], m[row]);
    ++row;
  }
  return row;
}

// ---- lattice family helpers ----

struct LweDomain {
  int c;
  std::vector<int32_t> s;
  std::vector<int32_t> e;  // centered values
};

LweDomain decode_domain(const LweKey& k, const Bits& x) {
  const int q = k.q();
  const int bound = k.noise_bound();
  size_t pos = 0;
  LweDomain d;
  d.c = x[pos++];
  d.s.resize(k.n);
  for (int j = 0; j < k.n; ++j) {
    int32_t v = 0;
    for (int i = 0; i < k.kbits; ++i) v = (v << 1) | x[pos++];
    d.s[j] = v % q;
  }
  d.e.resize(k.m);
  for (int i = 0; i < k.m; ++i) {
    int32_t v = 0;
    for (int b = 0; b < k.ebits; ++b) v = (v << 1) | x[pos++];
    d.e[i] = v - bound;  // offset-binary encoding of [-bound, bound-1]
  }
  return d;
}

Bits encode_domain(const LweKey& k, const LweDomain& d) {
  Bits x;
  x.reserve(1 + k.n * k.kbits + k.m * k.ebits);
  x.push_back(uint8_t(d.c & 1));
  for (int j = 0; j < k.n; ++j)
    for (int i = k.kbits - 1; i >= 0; --i) x.push_back((d.s[j] >> i) & 1);
  const int bound = k.noise_bound();
  for (int i = 0; i < k.m; ++i) {
    int32_t v = d.e[i] + bound;
    for (int b = k.ebits - 1; b >= 0; --b) x.push_back((v >> b) & 1);
  }
  return x;
}

std::vector<int32_t> mat_vec_modq(const std::vector<std::vector<int32_t>>& m,
                                  const std::vector<int32_t>& v, int32_t q) {
  std::vector<int32_t> out(m.size(), 0);
  for (size_t r = 0; r < m.size(); ++r) {
    int64_t acc = 0;
    for (size_t c = 0; c < v.size(); ++c) acc += int64_t(m[r][c]) * v[c];
    out[r] = int32_t(((acc % q) + q) % q);
  }
  return out;
}

// Per-coordinate gadget decode: w2[j*kbits + i] = s_j * 2^i + err (mod 2^k),
// |err| < 2^{k-2}; bits recovered from the top coordinate downwards.
std::vector<int32_t> gadget_decode(const LweKey& k, const std::vector<int32_t>& w2) {
  const int32_t q = k.q();
  std::vector<int32_t> s(k.n);
  for (int j = 0; j < k.n; ++j) {
    int32_t sj = 0;
    for (int i = 0; i < k.kbits; ++i) {
      int32_t v = w2[j * k.kbits + (k.kbits - 1 - i)];
      int32_t sub = (v - int32_t((int64_t(sj) << (k.kbits - 1 - i)) % q) % q + 2 * q) % q;
      int bit = ((sub + (q >> 2)) & (q - 1)) >> (k.kbits - 1);
      sj |= bit << i;
    }
    s[j] = sj;
  }
  return s;
}

// Inverts y - cand_c*y_f to (s, e) via the trapdoor; checks the noise bound.
std::optional<LweDomain> lwe_open(const LweKey& k, const std::vector<int32_t>& y, int cand_c) {
  const int32_t q = k.q();
  std::vector<int32_t> yp(y.size());
  for (size_t i = 0; i < y.size(); ++i)
    yp[i] = int32_t(((int64_t(y[i]) - int64_t(cand_c) * k.y_f[i]) % q + q) % q);
  // w2 = y_bottom - R y_top = G s + (e2 - R e1).
  std::vector<int32_t> w2(k.n * k.kbits);
  for (int r = 0; r < k.n * k.kbits; ++r) {
    int64_t acc = yp[k.n + r];
    for (int c = 0; c < k.n; ++c) acc -= int64_t(k.r_mat[r][c]) * yp[c];
    w2[r] = int32_t(((acc % q) + q) % q);
  }
  std::vector<int32_t> s = gadget_decode(k, w2);
  std::vector<int32_t> ks = mat_vec_modq(k.k_mat, s, q);
  LweDomain d;
  d.c = cand_c;
  d.s = s;
  d.e.resize(k.m);
  const int32_t bound = k.noise_bound();
  for (int i = 0; i < k.m; ++i) {
    int32_t e = (yp[i] - ks[i] % q + 2 * q) % q;
    if (e >= q / 2) e -= q;  // center
    if (e < -bound || e > bound - 1) return std::nullopt;
    d.e[i] = e;
  }
  return d;
}

json bits_to_json(const Bits& b) {
  return json(std::vector<int>(b.begin(), b.end()));
}

Bits bits_from_json(const json& j) {
  Bits b;
  for (const auto& v : j) b.push_back(uint8_t(int(v) & 1));
  return b;
}

}  // namespace

std::vector<uint8_t> RangePoint::to_bytes() const {
  std::vector<uint8_t> out;
  out.push_back(bits.empty() ? 1 : 0);  // family tag
  uint32_t n = bits.empty() ? uint32_t(coords.size()) : uint32_t(bits.size());
  for (int i = 0; i < 4; ++i) out.push_back((n >> (8 * i)) & 0xff);
  if (!bits.empty()) {
    out.insert(out.end(), bits.begin(), bits.end());
  } else {
    for (int32_t v : coords)
      for (int i = 0; i < 4; ++i) out.push_back((uint32_t(v) >> (8 * i)) & 0xff);
  }
  return out;
}

RangePoint RangePoint::from_bytes(const std::vector<uint8_t>& data) {
  if (data.size() < 5) throw Error(Err::Usage, "RangePoint: truncated");
  RangePoint p;
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= uint32_t(data[1 + i]) << (8 * i);
  if (data[0] == 0) {
    p.bits.assign(data.begin() + 5, data.begin() + 5 + n);
  } else {
    for (uint32_t j = 0; j < n; ++j) {
      uint32_t v = 0;
      for (int i = 0; i < 4; ++i) v |= uint32_t(data[5 + 4 * j + i]) << (8 * i);
      p.coords.push_back(int32_t(v));
    }
  }
  return p;
}

int TrapdoorKeyPair::domain_bits() const {
  if (family == Family::Toy) return toy.n;
  return 1 + lwe.n * lwe.kbits + lwe.m * lwe.ebits;
}

RangePoint TrapdoorKeyPair::eval(const Bits& x) const {
  if (int(x.size()) != domain_bits()) throw Error(Err::LengthMismatch, "eval: domain size");
  RangePoint y;
  if (family == Family::Toy) {
    y.bits.resize(toy.n);
    for (int i = 0; i < toy.n; ++i) y.bits[i] = uint8_t(row_dot(toy.a_rows[i], x));
  } else {
    LweDomain d = decode_domain(lwe, x);
    const int32_t q = lwe.q();
    std::vector<int32_t> ks = mat_vec_modq(lwe.k_mat, d.s, q);
    y.coords.resize(lwe.m);
    for (int i = 0; i < lwe.m; ++i) {
      int64_t v = ks[i] + d.e[i] + int64_t(d.c) * lwe.y_f[i];
      y.coords[i] = int32_t(((v % q) + q) % q);
    }
  }
  return y;
}

int TrapdoorKeyPair::hardcore(const Bits& x) const {
  if (family == Family::Toy) return dot2(toy.c, x);
  LweDomain d = decode_domain(lwe, x);
  int h = 0;
  for (int j = 0; j < lwe.n; ++j) h ^= (lwe.w[j] & d.s[j] & 1);
  return h;
}

int TrapdoorKeyPair::d0() const {
  if (family == Family::Toy) return dot2(toy.c, toy.z);
  int h = 0;
  for (int j = 0; j < lwe.n; ++j) h ^= (lwe.w[j] & lwe.s0[j] & 1);
  return h;
}

TrapdoorKeyPair toy_gen(int n, Rng& rng) {
  if (n < 2 || n > 12) throw Error(Err::Usage, "toy_gen: n out of range");
  TrapdoorKeyPair kp;
  kp.family = TrapdoorKeyPair::Family::Toy;
  ToyKey& k = kp.toy;
  k.n = n;
  // Nonzero kernel element z, then columns: the columns off the pivot of z
  // are sampled until they are linearly independent; the pivot column is
  // forced so that A z = 0 and the kernel is exactly {0, z}.
  for (;;) {
    k.z.assign(n, 0);
    for (int i = 0; i < n; ++i) k.z[i] = uint8_t(rng.next_bit());
    if (std::any_of(k.z.begin(), k.z.end(), [](uint8_t v) { return v; })) break;
  }
  int pivot = 0;
  while (!k.z[pivot]) ++pivot;
  for (;;) {
    std::vector<Bits> cols(n, Bits(n, 0));
    for (int j = 0; j < n; ++j) {
      if (j == pivot) continue;
      for (int i = 0; i < n; ++i) cols[j][i] = uint8_t(rng.next_bit());
    }
    for (int i = 0; i < n; ++i) {
      int acc = 0;
      for (int j = 0; j < n; ++j)
        if (j != pivot && k.z[j]) acc ^= cols[j][i];
      cols[pivot][i] = uint8_t(acc);
    }
    k.a_rows.assign(n, Bits(n, 0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k.a_rows[i][j] = cols[j][i];
    if (gf2_rank(k.a_rows, n) == n - 1) break;
    k.a_rows.clear();
  }
  k.c.assign(n, 0);
  for (int i = 0; i < n; ++i) k.c[i] = uint8_t(rng.next_bit());
  return kp;
}

TrapdoorKeyPair lwe_gen(const LweParams& params, Rng& rng) {
  if (params.n < 2 || params.n > 16 || params.kbits < 4 || params.kbits > 16 ||
      params.ebits < 2 || params.ebits >= params.kbits - 2)
    throw Error(Err::Usage, "lwe_gen: bad params");
  TrapdoorKeyPair kp;
  kp.family = TrapdoorKeyPair::Family::Lwe;
  LweKey& k = kp.lwe;
  k.n = params.n;
  k.kbits = params.kbits;
  k.ebits = params.ebits;
  k.m = k.n + k.n * k.kbits;
  const int32_t q = k.q();
  // Noise amplification through the trapdoor must stay inside the gadget
  // decoding radius q/4.
  if (int64_t(k.noise_bound()) * (k.n + 1) >= q / 4)
    throw Error(Err::Usage, "lwe_gen: noise exceeds decoding radius");

  std::vector<std::vector<int32_t>> a(k.n, std::vector<int32_t>(k.n));
  for (auto& row : a)
    for (auto& v : row) v = int32_t(rng.below(uint64_t(q)));
  k.r_mat.assign(k.n * k.kbits, std::vector<int8_t>(k.n));
  for (auto& row : k.r_mat)
    for (auto& v : row) v = int8_t(int(rng.below(3)) - 1);

  k.k_mat.assign(k.m, std::vector<int32_t>(k.n, 0));
  for (int r = 0; r < k.n; ++r) k.k_mat[r] = a[r];
  for (int r = 0; r < k.n * k.kbits; ++r) {
    for (int c = 0; c < k.n; ++c) {
      int64_t acc = 0;
      for (int t = 0; t < k.n; ++t) acc += int64_t(k.r_mat[r][t]) * a[t][c];
      if (c == r / k.kbits) acc += int64_t(1) << (r % k.kbits);  // gadget entry
      k.k_mat[k.n + r][c] = int32_t(((acc % q) + q) % q);
    }
  }

  k.s0.resize(k.n);
  for (auto& v : k.s0) v = int32_t(rng.below(uint64_t(q)));
  k.y_f = mat_vec_modq(k.k_mat, k.s0, q);
  for (;;) {
    k.w.assign(k.n, 0);
    for (int i = 0; i < k.n; ++i) k.w[i] = uint8_t(rng.next_bit());
    if (std::any_of(k.w.begin(), k.w.end(), [](uint8_t v) { return v; })) break;
  }
  return kp;
}

std::optional<std::pair<Bits, Bits>> invert(const TrapdoorKeyPair& keys, const RangePoint& y) {
  if (keys.family == TrapdoorKeyPair::Family::Toy) {
    const ToyKey& k = keys.toy;
    if (int(y.bits.size()) != k.n) return std::nullopt;
    auto x0 = solve_gf2(k.a_rows, y.bits, k.n);
    if (!x0) return std::nullopt;
    Bits x1 = xor_bits(*x0, k.z);
    if (x1 < *x0) std::swap(*x0, x1);
    return std::make_pair(*x0, x1);
  }
  const LweKey& k = keys.lwe;
  if (int(y.coords.size()) != k.m) return std::nullopt;
  auto d0 = lwe_open(k, y.coords, 0);
  auto d1 = lwe_open(k, y.coords, 1);
  if (!d0 || !d1) return std::nullopt;
  Bits x0 = encode_domain(k, *d0);
  Bits x1 = encode_domain(k, *d1);
  // Safety: both candidates must actually map to y.
  if (!(keys.eval(x0) == y) || !(keys.eval(x1) == y)) return std::nullopt;
  if (x1 < x0) std::swap(x0, x1);
  return std::make_pair(x0, x1);
}

std::vector<int32_t> lwe_enc(const TrapdoorKeyPair& keys, int b, Rng& rng) {
  if (keys.family != TrapdoorKeyPair::Family::Lwe)
    throw Error(Err::NotSupported, "lwe_enc: lattice family only");
  const LweKey& k = keys.lwe;
  const int32_t q = k.q();
  std::vector<int32_t> s(k.n);
  for (auto& v : s) v = int32_t(rng.below(uint64_t(q)));
  std::vector<int32_t> y0 = mat_vec_modq(k.k_mat, s, q);
  const int32_t bound = k.noise_bound();
  for (int i = 0; i < k.m; ++i) {
    int32_t e = int32_t(rng.below(uint64_t(2 * bound))) - bound;
    y0[i] = int32_t(((int64_t(y0[i]) + e) % q + q) % q);
  }
  if (b & 1) y0[0] = int32_t((y0[0] + q / 2) % q);
  return y0;
}

int lwe_dec(const TrapdoorKeyPair& keys, const std::vector<int32_t>& y0) {
  if (keys.family != TrapdoorKeyPair::Family::Lwe)
    throw Error(Err::NotSupported, "lwe_dec: lattice family only");
  const LweKey& k = keys.lwe;
  const int32_t q = k.q();
  for (int b = 0; b < 2; ++b) {
    std::vector<int32_t> yp = y0;
    if (b) yp[0] = int32_t((yp[0] - q / 2 + q) % q);
    // Accept b iff (yp - K s) is small after gadget decoding.
    std::vector<int32_t> w2(k.n * k.kbits);
    for (int r = 0; r < k.n * k.kbits; ++r) {
      int64_t acc = yp[k.n + r];
      for (int c = 0; c < k.n; ++c) acc -= int64_t(k.r_mat[r][c]) * yp[c];
      w2[r] = int32_t(((acc % q) + q) % q);
    }
    std::vector<int32_t> s = gadget_decode(k, w2);
    std::vector<int32_t> ks = mat_vec_modq(k.k_mat, s, q);
    bool ok = true;
    const int32_t bound = k.noise_bound();
    for (int i = 0; i < k.m && ok; ++i) {
      int32_t e = (yp[i] - ks[i] + 2 * q) % q;
      if (e >= q / 2) e -= q;
      ok = (e >= -bound && e <= bound - 1);
    }
    if (ok) return b;
  }
  throw Error(Err::DecodeAmbiguous, "lwe_dec: neither bit decodes");
}

Bits random_domain_element(const TrapdoorKeyPair& keys, Rng& rng) {
  Bits x(keys.domain_bits());
  for (auto& b : x) b = uint8_t(rng.next_bit());
  return x;
}

std::string TrapdoorKeyPair::to_json() const {
  json j;
  if (family == Family::Toy) {
    j["params"] = {{"family", "toy"}, {"n", toy.n}, {"q", 2}, {"noise", 0}};
    std::vector<uint8_t> flat;
    for (const auto& row : toy.a_rows) flat.insert(flat.end(), row.begin(), row.end());
    j["a"] = base64_encode(flat);
    j["c"] = bits_to_json(toy.c);
    j["z"] = bits_to_json(toy.z);
  } else {
    j["params"] = {{"family", "lwe"}, {"n", lwe.n}, {"q", lwe.q()}, {"noise", lwe.ebits}};
    auto enc_i32 = [](const std::vector<std::vector<int32_t>>& m) {
      std::vector<uint8_t> flat;
      for (const auto& row : m)
        for (int32_t v : row)
          for (int i = 0; i < 4; ++i) flat.push_back((uint32_t(v) >> (8 * i)) & 0xff);
      return base64_encode(flat);
    };
    j["k"] = enc_i32(lwe.k_mat);
    j["y_f"] = lwe.y_f;
    j["w"] = bits_to_json(lwe.w);
    std::vector<uint8_t> rflat;
    for (const auto& row : lwe.r_mat)
      for (int8_t v : row) rflat.push_back(uint8_t(v + 1));
    j["r"] = base64_encode(rflat);
    j["s0"] = lwe.s0;
  }
  return j.dump();
}

TrapdoorKeyPair TrapdoorKeyPair::from_json(const std::string& text) {
  json j = json::parse(text);
  TrapdoorKeyPair kp;
  const auto& p = j.at("params");
  if (p.at("family") == "toy") {
    kp.family = Family::Toy;
    kp.toy.n = p.at("n");
    auto flat = base64_decode(j.at("a"));
    kp.toy.a_rows.assign(kp.toy.n, Bits(kp.toy.n));
    for (int r = 0; r < kp.toy.n; ++r)
      for (int c = 0; c < kp.toy.n; ++c) kp.toy.a_rows[r][c] = flat[size_t(r) * kp.toy.n + c];
    kp.toy.c = bits_from_json(j.at("c"));
    kp.toy.z = bits_from_json(j.at("z"));
  } else {
    kp.family = Family::Lwe;
    LweKey& k = kp.lwe;
    k.n = p.at("n");
    int q = p.at("q");
    k.kbits = 0;
    while ((1 << k.kbits) < q) ++k.kbits;
    k.ebits = p.at("noise");
    k.m = k.n + k.n * k.kbits;
    auto flat = base64_decode(j.at("k"));
    k.k_mat.assign(k.m, std::vector<int32_t>(k.n));
    for (int r = 0; r < k.m; ++r)
      for (int c = 0; c < k.n; ++c) {
        uint32_t v = 0;
        size_t off = (size_t(r) * k.n + c) * 4;
        for (int i = 0; i < 4; ++i) v |= uint32_t(flat[off + i]) << (8 * i);
        k.k_mat[r][c] = int32_t(v);
      }
    k.y_f = j.at("y_f").get<std::vector<int32_t>>();
    k.w = bits_from_json(j.at("w"));
    auto rflat = base64_decode(j.at("r"));
    k.r_mat.assign(k.n * k.kbits, std::vector<int8_t>(k.n));
    for (int r = 0; r < k.n * k.kbits; ++r)
      for (int c = 0; c < k.n; ++c)
        k.r_mat[r][c] = int8_t(int(rflat[size_t(r) * k.n + c]) - 1);
    k.s0 = j.at("s0").get<std::vector<int32_t>>();
  }
  return kp;
}

}  // namespace qfu
