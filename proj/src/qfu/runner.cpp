#include "qfu/runner.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <thread>

#include "qfu/harness.hpp"

namespace qfu {

namespace {

using nlohmann::json;

uint64_t resolve_seed(const json& req) {
  if (req.contains("seed")) return req["seed"].get<uint64_t>();
  if (const char* env = std::getenv("QFUBQC_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

int req_trials(const json& req, int fallback) {
  const int t = req.value("trials", fallback);
  if (t < 1) throw Error(Err::Usage, "trials must be positive");
  return t;
}

// Splits a Monte-Carlo run across worker threads. Each chunk owns an
// independent RNG stream, so the totals depend on the jobs value but not on
// scheduling.
GameReport run_chunked(int trials, int jobs, Rng& rng,
                       const std::function<GameReport(int, Rng)>& piece) {
  jobs = std::clamp(jobs, 1, 64);
  jobs = std::min(jobs, trials);
  if (jobs == 1) return piece(trials, rng.split(uint64_t(0)));

  std::vector<GameReport> parts(static_cast<size_t>(jobs));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
  std::vector<std::thread> workers;
  const int base = trials / jobs, rem = trials % jobs;
  for (int i = 0; i < jobs; ++i) {
    const int chunk = base + (i < rem ? 1 : 0);
    workers.emplace_back([&, i, chunk] {
      try {
        parts[size_t(i)] = piece(chunk, rng.split(uint64_t(i)));
      } catch (...) {
        errors[size_t(i)] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  int wins = 0, total = 0;
  for (const auto& p : parts) {
    wins += p.wins;
    total += p.trials;
  }
  return make_report(parts[0].game_id, total, wins, parts[0].notes);
}

json report_json(const json& req, const GameReport& rep) {
  json out;
  out["schema"] = 1;
  out["cmd"] = req["cmd"];
  out["seed"] = resolve_seed(req);
  out["game_id"] = rep.game_id;
  out["trials"] = rep.trials;
  out["wins"] = rep.wins;
  out["win_rate"] = rep.win_rate;
  out["ci95"] = {rep.ci95.first, rep.ci95.second};
  out["notes"] = rep.notes;
  return out;
}

TrapdoorKeyPair::Family family_of(const json& req) {
  const std::string f = req.value("family", "toy");
  if (f == "toy") return TrapdoorKeyPair::Family::Toy;
  if (f == "lwe") return TrapdoorKeyPair::Family::Lwe;
  throw Error(Err::Usage, "family must be toy or lwe");
}

TrapdoorKeyPair fresh_keys(TrapdoorKeyPair::Family fam, int toy_n, Rng& rng) {
  return fam == TrapdoorKeyPair::Family::Toy ? toy_gen(toy_n, rng)
                                             : lwe_gen(LweParams{}, rng);
}

TrapdoorKeyPair odd_kernel_toy(int n, Rng& rng) {
  TrapdoorKeyPair k = toy_gen(n, rng);
  while (std::count(k.toy.z.begin(), k.toy.z.end(), 1) % 2 == 0) k = toy_gen(n, rng);
  return k;
}

// --------------------------------------------------------------------------
// Protocol runs

json cmd_qfactory4(const json& req) {
  const auto fam = family_of(req);
  const int n = req.value("n", fam == TrapdoorKeyPair::Family::Toy ? 4 : 0);
  const std::string basis_s = req.value("basis", "standard");
  if (basis_s != "standard" && basis_s != "rotated")
    throw Error(Err::Usage, "basis must be standard or rotated");
  const Basis basis = basis_s == "standard" ? Basis::Standard : Basis::Rotated;
  const int trials = req_trials(req, 200);
  Rng rng(resolve_seed(req));

  auto piece = [&](int count, Rng base) {
    int wins = 0;
    for (int t = 0; t < count; ++t) {
      Rng trial = base.split(uint64_t(t));
      TrapdoorKeyPair keys = fresh_keys(fam, n, trial);
      QFactory4Outcome out = run_4states(keys, ServerBehavior::honest(), basis, trial);
      if (out.not_two_preimages || out.rotated_off_axis || !out.server_pure) continue;
      if (out.server_pure->overlap(out.description_state()) >= 1 - 1e-9) ++wins;
    }
    return make_report("qfactory4", count, wins,
                       "wins = sessions whose held state matches the client description");
  };
  return report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
}

json cmd_qfactory8(const json& req) {
  const int n = req.value("n", 4);
  const int trials = req_trials(req, 200);
  Rng rng(resolve_seed(req));

  auto piece = [&](int count, Rng base) {
    int wins = 0;
    for (int t = 0; t < count; ++t) {
      Rng trial = base.split(uint64_t(t));
      TrapdoorKeyPair k1 = toy_gen(n, trial);
      TrapdoorKeyPair k2 = odd_kernel_toy(n, trial);
      QFactory8Outcome out = run_8states(k1, k2, ServerBehavior::honest(), trial);
      if (out.server_pure &&
          out.server_pure->overlap(PureState::plus(out.angle())) >= 1 - 1e-9)
        ++wins;
    }
    return make_report("qfactory8", count, wins,
                       "wins = sessions whose merged state matches the derived octant");
  };
  return report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
}

PhiTable phi_from_request(const json& req, int n, int m) {
  PhiTable phi(size_t(n), std::vector<AngleOctant>(size_t(m), AngleOctant(0)));
  if (!req.contains("phi")) return phi;
  const json& tab = req["phi"];
  if (!tab.is_array() || int(tab.size()) != n)
    throw Error(Err::Usage, "phi must be an n-row array of octant rows");
  for (int i = 0; i < n; ++i) {
    if (!tab[i].is_array() || int(tab[i].size()) != m)
      throw Error(Err::Usage, "phi rows must have m octants");
    for (int j = 0; j < m; ++j) phi[i][j] = AngleOctant(tab[i][j].get<int>());
  }
  return phi;
}

std::string bits_key(const Bits& b) {
  std::string s;
  for (uint8_t v : b) s += char('0' + (v & 1));
  return s;
}

json cmd_ubqc(const json& req, bool force_qfactory_source) {
  const int n = req.value("n", 2), m = req.value("m", 2);
  if (n < 1 || m < 1) throw Error(Err::Usage, "graph needs n >= 1 and m >= 1");
  const std::string src = force_qfactory_source ? "qfactory8" : req.value("source", "channel");
  if (src != "channel" && src != "qfactory8")
    throw Error(Err::Usage, "source must be channel or qfactory8");
  const QubitSource source =
      src == "channel" ? QubitSource::QuantumChannel : QubitSource::QFactory8;
  const int trials = req_trials(req, 1000);
  MeasurementPattern pattern = build_brickwork(n, m, phi_from_request(req, n, m));
  Rng rng(resolve_seed(req));

  const int jobs = std::clamp(req.value("jobs", 1), 1, 64);
  std::vector<std::map<std::string, int>> counts(size_t(std::min(jobs, trials)));
  {
    std::vector<std::exception_ptr> errors(counts.size());
    std::vector<std::thread> workers;
    const int pieces = int(counts.size());
    const int base = trials / pieces, rem = trials % pieces;
    for (int i = 0; i < pieces; ++i) {
      const int chunk = base + (i < rem ? 1 : 0);
      workers.emplace_back([&, i, chunk] {
        try {
          Rng piece_rng = rng.split(uint64_t(i));
          for (int t = 0; t < chunk; ++t) {
            Rng trial = piece_rng.split(uint64_t(t));
            UBQCResult res = run_ubqc(pattern, source, ServerBehavior::honest(), trial);
            ++counts[size_t(i)][bits_key(res.output)];
          }
        } catch (...) {
          errors[size_t(i)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::map<std::string, int> freq;
  for (const auto& c : counts)
    for (const auto& [k, v] : c) freq[k] += v;

  json out;
  out["schema"] = 1;
  out["cmd"] = req["cmd"];
  out["seed"] = resolve_seed(req);
  out["trials"] = trials;
  out["n"] = n;
  out["m"] = m;
  out["source"] = src;
  json jf = json::object();
  for (const auto& [k, v] : freq) jf[k] = v;
  out["frequencies"] = jf;

  if (n * m <= 12) {
    std::map<Bits, double> exact = reference_mbqc(pattern);
    double tv = 0;
    std::map<std::string, double> exact_by_key;
    for (const auto& [bits, p] : exact) exact_by_key[bits_key(bits)] = p;
    std::map<std::string, double> emp;
    for (const auto& [k, v] : freq) emp[k] = double(v) / trials;
    for (const auto& [k, p] : exact_by_key) tv += std::abs(p - (emp.count(k) ? emp[k] : 0.0));
    for (const auto& [k, p] : emp)
      if (!exact_by_key.count(k)) tv += p;
    out["tv_distance"] = tv / 2;
  }
  return out;
}

// --------------------------------------------------------------------------
// Games

json cmd_blindness(const json& req) {
  const int n = req.value("n", 2), m = req.value("m", 2);
  const int trials = req_trials(req, 1000);
  const std::string mode = req.value("mode", "honest");
  Rng rng(resolve_seed(req));

  BlindnessAdversary adv;
  auto random_table = [](int rows, int cols, Rng& r) {
    PhiTable t(size_t(rows), std::vector<AngleOctant>(size_t(cols), AngleOctant(0)));
    for (auto& row : t)
      for (auto& a : row) a = AngleOctant(int(r.below(8)));
    return t;
  };
  if (mode == "random") {
    adv.choose = [random_table](int rows, int cols, Rng& r) {
      return std::make_pair(random_table(rows, cols, r), random_table(rows, cols, r));
    };
    adv.guess = [](const BlindnessView&, Rng& r) { return int(r.next_bit()); };
  } else if (mode == "honest") {
    adv.choose = [random_table](int rows, int cols, Rng& r) {
      return std::make_pair(random_table(rows, cols, r), random_table(rows, cols, r));
    };
    adv.guess = [](const BlindnessView& v, Rng&) {
      int acc = 0;
      for (const AngleOctant& d : v.delta) acc ^= d.k;
      for (uint8_t b : v.s) acc ^= b;
      return acc & 1;
    };
  } else if (mode == "leak") {
    adv.leak_theta = true;
    adv.choose = [](int rows, int cols, Rng&) {
      PhiTable t1(size_t(rows), std::vector<AngleOctant>(size_t(cols), AngleOctant(0)));
      PhiTable t2 = t1;
      t2[0][0] = AngleOctant(2);
      return std::make_pair(t1, t2);
    };
    adv.guess = [](const BlindnessView& v, Rng&) {
      return ((v.delta[0] - v.leaked_theta[0]).k % 4) == 2 ? 1 : 0;
    };
  } else {
    throw Error(Err::Usage, "mode must be random, honest, or leak");
  }

  auto piece = [&](int count, Rng base) { return blindness_game(adv, n, m, count, base); };
  json out = report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
  out["mode"] = mode;
  return out;
}

json cmd_hybrids(const json& req) {
  if (!req.contains("game")) throw Error(Err::Usage, "hybrids needs a game index (1..7)");
  const int g = req["game"].get<int>();
  const int trials = req_trials(req, 10000);
  Rng rng(resolve_seed(req));
  HybridAdversary adv = honest_hybrid_adversary();
  auto piece = [&](int count, Rng base) { return run_hybrid(g, adv, count, base); };
  return report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
}

json cmd_basis_blindness(const json& req) {
  const std::string kind_s = req.value("kind", "4");
  BasisBlindKind kind;
  if (kind_s == "4" || kind_s == "fourstate")
    kind = BasisBlindKind::FourState;
  else if (kind_s == "8" || kind_s == "eightstate")
    kind = BasisBlindKind::EightState;
  else
    throw Error(Err::Usage, "kind must be 4 or 8");
  const std::string guesser_s = req.value("guesser", "blind");
  BasisGuesser guesser;
  if (guesser_s == "blind")
    guesser = [](const BasisBlindView&, Rng& r) {
      return std::make_pair(int(r.next_bit()), int(r.next_bit()));
    };
  else if (guesser_s == "brute")
    guesser = brute_force_basis_guesser;
  else
    throw Error(Err::Usage, "guesser must be blind or brute");
  const int trials = req_trials(req, 1000);
  Rng rng(resolve_seed(req));
  auto piece = [&](int count, Rng base) {
    return basis_blindness_estimate(kind, guesser, count, base);
  };
  json out = report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
  out["kind"] = kind_s;
  out["guesser"] = guesser_s;
  return out;
}

json cmd_describe(const json& req) {
  const std::string target_s = req.value("target", "qfactory4");
  DescriberTarget target;
  if (target_s == "qfactory4")
    target = DescriberTarget::QFactory4;
  else if (target_s == "qfactory8")
    target = DescriberTarget::QFactory8;
  else
    throw Error(Err::Usage, "target must be qfactory4 or qfactory8");
  const std::string method_s = req.value("method", "trapdoor");
  DescriberMethod method;
  if (method_s == "trapdoor")
    method = DescriberMethod::Trapdoor;
  else if (method_s == "brute")
    method = DescriberMethod::BruteForce;
  else if (method_s == "blind")
    method = DescriberMethod::Blind;
  else
    throw Error(Err::Usage, "method must be trapdoor, brute, or blind");
  const int trials = req_trials(req, 200);
  Rng rng(resolve_seed(req));
  DescriberResult res = describability_attack(target, method, trials, rng, family_of(req));

  json out;
  out["schema"] = 1;
  out["cmd"] = req["cmd"];
  out["seed"] = resolve_seed(req);
  out["target"] = target_s;
  out["method"] = res.method_tag;
  out["trials"] = trials;
  out["mean_overlap"] = res.mean_overlap;
  out["overlaps"] = res.overlaps;
  return out;
}

json cmd_cloning(const json& req) {
  const int res = req.value("resolution", 1000);
  json out;
  out["schema"] = 1;
  out["cmd"] = req["cmd"];
  out["seed"] = resolve_seed(req);
  out["resolution"] = res;
  out["best_mean_overlap"] = cloning_bound_search(res);
  return out;
}

json cmd_signaling(const json& req) {
  const std::string strat_s = req.value("strategy", "constant");
  const bool leak = req.value("leak", false);
  SignalingStrategy strategy;
  if (strat_s == "constant")
    strategy = [](const std::optional<AngleOctant>& phi0, Rng&) {
      return phi0 ? (phi0->k % 4) / 2 : 0;
    };
  else if (strat_s == "random")
    strategy = [](const std::optional<AngleOctant>& phi0, Rng& r) {
      return phi0 ? (phi0->k % 4) / 2 : int(r.next_bit());
    };
  else
    throw Error(Err::Usage, "strategy must be constant or random");
  const int trials = req_trials(req, 10000);
  Rng rng(resolve_seed(req));
  auto piece = [&](int count, Rng base) { return signaling_game(strategy, count, base, leak); };
  json out = report_json(req, run_chunked(trials, req.value("jobs", 1), rng, piece));
  out["strategy"] = strat_s;
  out["leak"] = leak;
  return out;
}

// --------------------------------------------------------------------------
// Lemma suite

DensityMatrix random_near_pure(size_t dim, double mix, Rng& rng) {
  std::vector<cplx> v(dim);
  double norm2 = 0;
  for (auto& a : v) {
    a = cplx(rng.next_double() * 2 - 1, rng.next_double() * 2 - 1);
    norm2 += std::norm(a);
  }
  Mat pure(dim, dim);
  for (size_t i = 0; i < dim; ++i)
    for (size_t j = 0; j < dim; ++j) pure.at(i, j) = v[i] * std::conj(v[j]) / norm2;
  DensityMatrix noise = DensityMatrix::random(dim, rng);
  return DensityMatrix(pure.scaled(1 - mix) + noise.mat().scaled(mix));
}

bool delta_pad_uniform() {
  for (int phik = 0; phik < 8; ++phik)
    for (int sX = 0; sX < 2; ++sX)
      for (int sZ = 0; sZ < 2; ++sZ) {
        std::array<int, 8> count{};
        for (int th = 0; th < 8; ++th)
          for (int r = 0; r < 2; ++r)
            ++count[size_t(angle_update(AngleOctant(phik), AngleOctant(th), r, sX, sZ).k)];
        for (int c : count)
          if (c != 2) return false;
      }
  return true;
}

json cmd_verify_lemmas(const json& req) {
  Rng rng(resolve_seed(req));
  json checks;
  double worst_identity = 0;

  const double merge_err = merge_gadget_max_error();
  checks["merge-circuit-exhaustive"] = merge_err < 1e-9;
  checks["hybrid-rewrite-1-2"] = verify_hybrid_rewrite_1_2();
  checks["hybrid-rewrite-3-4"] = verify_hybrid_rewrite_3_4();
  checks["hybrid-rewrite-5-6-7"] = verify_hybrid_rewrite_5_6_7();
  checks["delta-one-time-pad"] = delta_pad_uniform();

  // Tr(ab) = [Tr(a^2) + Tr(b^2)]/2 - ||a-b||_HS^2 / 2 on random pairs.
  bool identity_ok = true;
  Rng id_rng = rng.split("trace-identity");
  for (size_t dim : {size_t(2), size_t(4)})
    for (int i = 0; i < 500; ++i) {
      DensityMatrix a = DensityMatrix::random(dim, id_rng);
      DensityMatrix b = DensityMatrix::random(dim, id_rng);
      auto [lhs, rhs] = check_trace_identity(a, b);
      worst_identity = std::max(worst_identity, std::abs(lhs - rhs));
      if (std::abs(lhs - rhs) >= 1e-12) identity_ok = false;
    }
  checks["trace-identity"] = identity_ok;

  // With eps = 1 - Tr(ab): purities at least 1 - 2 eps, HS distance at most
  // sqrt(2 eps).
  bool props_ok = true;
  Rng pr_rng = rng.split("trace-properties");
  for (int i = 0; i < 1000; ++i) {
    const size_t dim = (i % 2) ? 4 : 2;
    DensityMatrix a, b;
    if (i % 4 < 2) {
      const double mix = 0.05 * pr_rng.next_double();
      a = random_near_pure(dim, mix, pr_rng);
      Rng copy = pr_rng;  // correlated pair around a different mix of the same draw
      b = DensityMatrix(a.mat().scaled(0.9) +
                        DensityMatrix::random(dim, copy).mat().scaled(0.1));
    } else {
      a = DensityMatrix::random(dim, pr_rng);
      b = DensityMatrix::random(dim, pr_rng);
    }
    const double eps = std::max(0.0, 1 - trace_overlap(a, b));
    if (a.purity() < 1 - 2 * eps - 1e-12) props_ok = false;
    if (b.purity() < 1 - 2 * eps - 1e-12) props_ok = false;
    if (hs_distance(a, b) > std::sqrt(2 * eps) + 1e-12) props_ok = false;
  }
  checks["trace-overlap-purity-bounds"] = props_ok;

  // Overlap transitivity: Tr(r1 r3) >= 1 - 3 (eps1 + eps2).
  bool trans_ok = true;
  Rng tr_rng = rng.split("trace-transitivity");
  for (int i = 0; i < 1000; ++i) {
    const size_t dim = (i % 2) ? 4 : 2;
    DensityMatrix r1, r2, r3;
    if (i % 4 < 2) {
      DensityMatrix anchor = random_near_pure(dim, 0.0, tr_rng);
      auto perturb = [&](double mix) {
        return DensityMatrix(anchor.mat().scaled(1 - mix) +
                             DensityMatrix::random(dim, tr_rng).mat().scaled(mix));
      };
      r1 = perturb(0.03 * tr_rng.next_double());
      r2 = perturb(0.03 * tr_rng.next_double());
      r3 = perturb(0.03 * tr_rng.next_double());
    } else {
      r1 = DensityMatrix::random(dim, tr_rng);
      r2 = DensityMatrix::random(dim, tr_rng);
      r3 = DensityMatrix::random(dim, tr_rng);
    }
    const double e1 = std::max(0.0, 1 - trace_overlap(r1, r2));
    const double e2 = std::max(0.0, 1 - trace_overlap(r2, r3));
    if (trace_overlap(r1, r3) < 1 - 3 * (e1 + e2) - 1e-12) trans_ok = false;
  }
  checks["trace-overlap-transitivity"] = trans_ok;

  bool all = true;
  for (const auto& [k, v] : checks.items()) all = all && v.get<bool>();

  json out;
  out["schema"] = 1;
  out["cmd"] = req["cmd"];
  out["seed"] = resolve_seed(req);
  out["checks"] = checks;
  out["merge_circuit_max_error"] = merge_err;
  out["max_trace_identity_residual"] = worst_identity;
  out["all_passed"] = all;
  return out;
}

}  // namespace

std::string run_request(const std::string& request_json) {
  json req;
  try {
    req = json::parse(request_json);
  } catch (const json::exception& e) {
    throw Error(Err::Usage, std::string("bad request JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string())
    throw Error(Err::Usage, "request needs a \"cmd\" string");
  const std::string cmd = req["cmd"].get<std::string>();

  json out;
  if (cmd == "qfactory4")
    out = cmd_qfactory4(req);
  else if (cmd == "qfactory8")
    out = cmd_qfactory8(req);
  else if (cmd == "ubqc")
    out = cmd_ubqc(req, false);
  else if (cmd == "qf-ubqc")
    out = cmd_ubqc(req, true);
  else if (cmd == "blindness")
    out = cmd_blindness(req);
  else if (cmd == "hybrids")
    out = cmd_hybrids(req);
  else if (cmd == "basis-blindness")
    out = cmd_basis_blindness(req);
  else if (cmd == "describe")
    out = cmd_describe(req);
  else if (cmd == "cloning-bound")
    out = cmd_cloning(req);
  else if (cmd == "signaling")
    out = cmd_signaling(req);
  else if (cmd == "verify-lemmas")
    out = cmd_verify_lemmas(req);
  else
    throw Error(Err::Usage, "unknown cmd: " + cmd);
  return out.dump();
}

}  // namespace qfu
