#include "qfu/brickwork.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace qfu {

using nlohmann::json;

void MeasurementPattern::validate() const {
  if (n < 1 || m < 1) throw Error(Err::BadDims, "pattern: n, m must be >= 1");
  const int total = n * m;
  if (int(phi.size()) != total || int(x_deps.size()) != total || int(z_deps.size()) != total)
    throw Error(Err::BadDims, "pattern: table sizes disagree with n*m");
  for (int v = 0; v < total; ++v) {
    for (int u : x_deps[v])
      if (u < 0 || u >= v) throw Error(Err::BadIndex, "pattern: x-dependency not earlier");
    for (int u : z_deps[v])
      if (u < 0 || u >= v) throw Error(Err::BadIndex, "pattern: z-dependency not earlier");
  }
  for (auto [a, b] : edges)
    if (a < 0 || b < 0 || a >= total || b >= total || a >= b)
      throw Error(Err::BadIndex, "pattern: malformed edge");
}

std::vector<std::pair<int, int>> brickwork_edges(int n, int m) {
  if (n < 1 || m < 1) throw Error(Err::BadDims, "brickwork: n, m must be >= 1");
  auto idx = [n](int row, int col) { return col * n + row; };
  std::set<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j + 1 < m; ++j)
      out.insert({idx(i, j), idx(i, j + 1)});
  // Brick verticals. 1-based: rows (i, i+1), i odd, at columns J == 3 mod 8
  // and J + 2; rows with i even at J == 7 mod 8 and J + 2.
  for (int j = 0; j < m; ++j) {
    int J = j + 1;
    int start_row;
    if (J % 8 == 3 || J % 8 == 5)
      start_row = 0;  // 1-based odd rows
    else if (J % 8 == 7 || J % 8 == 1)
      start_row = 1;  // 1-based even rows
    else
      continue;
    if (J % 8 == 5 || (J % 8 == 1 && J > 1)) {
      // second column of a brick: only valid if the brick started in range
      if (j - 2 < 0) continue;
    } else if (J % 8 == 1) {
      continue;  // J == 1 is not a brick column
    }
    for (int i = start_row; i + 1 < n; i += 2) {
      int a = idx(i, j), b = idx(i + 1, j);
      out.insert({std::min(a, b), std::max(a, b)});
    }
  }
  return {out.begin(), out.end()};
}

MeasurementPattern build_brickwork(int n, int m,
                                   const std::vector<std::vector<AngleOctant>>& phi) {
  if (n < 1 || m < 1) throw Error(Err::BadDims, "brickwork: n, m must be >= 1");
  if (int(phi.size()) != n) throw Error(Err::BadDims, "brickwork: phi row count");
  MeasurementPattern pat;
  pat.n = n;
  pat.m = m;
  pat.phi.resize(n * m, AngleOctant(0));
  for (int i = 0; i < n; ++i) {
    if (int(phi[i].size()) != m) throw Error(Err::BadDims, "brickwork: phi column count");
    for (int j = 0; j < m; ++j) pat.phi[pat.index(i, j)] = phi[i][j];
  }
  pat.edges = brickwork_edges(n, m);
  pat.x_deps.assign(n * m, {});
  pat.z_deps.assign(n * m, {});
  // Canonical flow f(i,j) = (i, j+1): X-dep is the row predecessor; Z-deps of
  // v are the u != v whose flow image neighbours v.
  std::vector<std::set<int>> adj(n * m);
  for (auto [a, b] : pat.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  for (int v = 0; v < n * m; ++v)
    if (pat.col_of(v) > 0) pat.x_deps[v].push_back(pat.index(pat.row_of(v), pat.col_of(v) - 1));
  for (int u = 0; u < n * m; ++u) {
    if (pat.col_of(u) + 1 >= m) continue;
    int fu = pat.index(pat.row_of(u), pat.col_of(u) + 1);
    for (int w : adj[fu])
      if (w != u) pat.z_deps[w].push_back(u);
  }
  for (auto& d : pat.z_deps) std::sort(d.begin(), d.end());
  pat.validate();
  return pat;
}

std::string MeasurementPattern::to_json() const {
  json j;
  j["n"] = n;
  j["m"] = m;
  auto table = [&](auto get) {
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
      json row = json::array();
      for (int c = 0; c < m; ++c) row.push_back(get(index(i, c)));
      rows.push_back(row);
    }
    return rows;
  };
  j["phi"] = table([&](int v) { return phi[v].k; });
  auto deps = [&](const std::vector<std::vector<int>>& d) {
    return table([&](int v) {
      json lst = json::array();
      for (int u : d[v]) lst.push_back(json::array({row_of(u), col_of(u)}));
      return lst;
    });
  };
  j["x_deps"] = deps(x_deps);
  j["z_deps"] = deps(z_deps);
  return j.dump();
}

MeasurementPattern MeasurementPattern::from_json(const std::string& text) {
  json j = json::parse(text);
  int n = j.at("n"), m = j.at("m");
  std::vector<std::vector<AngleOctant>> phi;
  for (const auto& row : j.at("phi")) {
    std::vector<AngleOctant> r;
    for (int oct : row) r.push_back(AngleOctant(oct));
    phi.push_back(std::move(r));
  }
  MeasurementPattern pat = build_brickwork(n, m, phi);
  // Explicit dependencies, when present, override the canonical generator.
  auto load = [&](const char* key, std::vector<std::vector<int>>& dst) {
    if (!j.contains(key)) return;
    dst.assign(n * m, {});
    int i = 0;
    for (const auto& row : j.at(key)) {
      int c = 0;
      for (const auto& lst : row) {
        for (const auto& rc : lst) dst[pat.index(i, c)].push_back(pat.index(rc[0], rc[1]));
        ++c;
      }
      ++i;
    }
  };
  load("x_deps", pat.x_deps);
  load("z_deps", pat.z_deps);
  pat.validate();
  return pat;
}

}  // namespace qfu
