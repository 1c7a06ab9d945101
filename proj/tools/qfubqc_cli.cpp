// Batch driver: protocol runs, security games, and the lemma suite, emitting
// one JSON report per invocation (optionally CSV rows for external tools).
#include <CLI11.hpp>
#include <json.hpp>
#include <qfubqc.h>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string seed;  // empty = fall back to QFUBQC_SEED, then 1
  int trials = 0;    // 0 = subcommand default
  int jobs = 1;
  std::string output;
  std::string csv;
};

void add_common(CLI::App* sub, CommonOpts& opts, bool with_trials = true) {
  sub->add_option("--seed", opts.seed, "RNG seed (default: $QFUBQC_SEED, then 1)");
  if (with_trials) sub->add_option("--trials", opts.trials, "Monte-Carlo trials");
  sub->add_option("--jobs", opts.jobs, "worker threads for trial loops")
      ->check(CLI::Range(1, 64));
  sub->add_option("--output", opts.output, "write the JSON report to this file");
  sub->add_option("--csv", opts.csv, "write per-trial/aggregate rows to this CSV file");
}

void apply_common(json& req, const CommonOpts& opts) {
  if (!opts.seed.empty()) req["seed"] = std::stoull(opts.seed);
  if (opts.trials > 0) req["trials"] = opts.trials;
  if (opts.jobs > 1) req["jobs"] = opts.jobs;
}

json load_phi(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--pattern", "cannot read " + path);
  json j = json::parse(in, nullptr, /*allow_exceptions=*/true);
  if (j.is_object() && j.contains("phi")) return j["phi"];
  if (j.is_array()) return j;
  throw CLI::ValidationError("--pattern", "expected an angle table or {\"phi\": table}");
}

void write_csv(const std::string& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (report.contains("overlaps")) {
    out << "trial,overlap\n";
    int i = 0;
    for (const auto& v : report["overlaps"]) out << i++ << "," << v.get<double>() << "\n";
  } else if (report.contains("frequencies")) {
    out << "output,count\n";
    for (const auto& [k, v] : report["frequencies"].items())
      out << k << "," << v.get<int>() << "\n";
  } else if (report.contains("checks")) {
    out << "check,passed\n";
    for (const auto& [k, v] : report["checks"].items())
      out << k << "," << (v.get<bool>() ? 1 : 0) << "\n";
  } else {
    out << "game_id,trials,wins,win_rate,ci_low,ci_high\n";
    out << report.value("game_id", report.value("cmd", std::string())) << ","
        << report.value("trials", 0) << "," << report.value("wins", 0) << ","
        << report.value("win_rate", 0.0);
    if (report.contains("ci95"))
      out << "," << report["ci95"][0].get<double>() << "," << report["ci95"][1].get<double>();
    else
      out << ",,";
    out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delegated quantum computation: protocol runs, games, lemma suites"};
  app.require_subcommand(1);

  struct SubSpec {
    CLI::App* sub = nullptr;
    CommonOpts opts;
    json req;
  };
  std::vector<std::unique_ptr<SubSpec>> specs;
  auto make_sub = [&](const std::string& name, const std::string& desc,
                      bool with_trials = true) -> SubSpec& {
    auto spec = std::make_unique<SubSpec>();
    spec->sub = app.add_subcommand(name, desc);
    spec->req["cmd"] = name;
    add_common(spec->sub, spec->opts, with_trials);
    specs.push_back(std::move(spec));
    return *specs.back();
  };

  // Protocol runs -----------------------------------------------------------
  auto& q4 = make_sub("qfactory4", "four-state remote preparation sessions");
  auto q4_family = std::make_shared<std::string>("toy");
  auto q4_n = std::make_shared<int>(4);
  auto q4_basis = std::make_shared<std::string>("standard");
  q4.sub->add_option("--family", *q4_family, "toy | lwe")
      ->check(CLI::IsMember({"toy", "lwe"}));
  q4.sub->add_option("--n", *q4_n, "toy domain bits")->check(CLI::Range(2, 8));
  q4.sub->add_option("--basis", *q4_basis, "standard | rotated")
      ->check(CLI::IsMember({"standard", "rotated"}));
  q4.sub->callback([&q4, q4_family, q4_n, q4_basis] {
    q4.req["family"] = *q4_family;
    q4.req["n"] = *q4_n;
    q4.req["basis"] = *q4_basis;
  });

  auto& q8 = make_sub("qfactory8", "eight-state remote preparation sessions");
  auto q8_n = std::make_shared<int>(4);
  q8.sub->add_option("--n", *q8_n, "toy domain bits")->check(CLI::Range(2, 6));
  q8.sub->callback([&q8, q8_n] { q8.req["n"] = *q8_n; });

  auto add_graph_pattern = [](SubSpec& s, std::shared_ptr<std::vector<int>> graph,
                              std::shared_ptr<std::string> pattern) {
    s.sub->add_option("--graph", *graph, "rows and columns of the grid")
        ->expected(2);
    s.sub->add_option("--pattern", *pattern, "JSON file with the angle table");
  };
  auto apply_graph_pattern = [](SubSpec& s, const std::vector<int>& graph,
                                const std::string& pattern) {
    if (!graph.empty()) {
      s.req["n"] = graph[0];
      s.req["m"] = graph[1];
    }
    if (!pattern.empty()) s.req["phi"] = load_phi(pattern);
  };

  auto& ub = make_sub("ubqc", "blind delegated measurement pattern, sampled outputs");
  auto ub_graph = std::make_shared<std::vector<int>>();
  auto ub_pattern = std::make_shared<std::string>();
  auto ub_source = std::make_shared<std::string>("channel");
  add_graph_pattern(ub, ub_graph, ub_pattern);
  ub.sub->add_option("--source", *ub_source, "channel | qfactory8")
      ->check(CLI::IsMember({"channel", "qfactory8"}));
  ub.sub->callback([&ub, ub_graph, ub_pattern, ub_source, apply_graph_pattern] {
    apply_graph_pattern(ub, *ub_graph, *ub_pattern);
    ub.req["source"] = *ub_source;
  });

  auto& qfub = make_sub("qf-ubqc", "blind pattern with remotely prepared qubits");
  auto qfub_graph = std::make_shared<std::vector<int>>();
  auto qfub_pattern = std::make_shared<std::string>();
  auto qfub_family = std::make_shared<std::string>("toy");
  add_graph_pattern(qfub, qfub_graph, qfub_pattern);
  qfub.sub->add_option("--family", *qfub_family, "key family (toy only)")
      ->check(CLI::IsMember({"toy"}));
  qfub.sub->callback([&qfub, qfub_graph, qfub_pattern, apply_graph_pattern] {
    apply_graph_pattern(qfub, *qfub_graph, *qfub_pattern);
  });

  // Games -------------------------------------------------------------------
  auto& bl = make_sub("blindness", "angle-table guessing game");
  auto bl_graph = std::make_shared<std::vector<int>>();
  auto bl_mode = std::make_shared<std::string>("honest");
  bl.sub->add_option("--graph", *bl_graph, "rows and columns of the grid")->expected(2);
  bl.sub->add_option("--mode", *bl_mode, "random | honest | leak")
      ->check(CLI::IsMember({"random", "honest", "leak"}));
  bl.sub->callback([&bl, bl_graph, bl_mode] {
    if (!bl_graph->empty()) {
      bl.req["n"] = (*bl_graph)[0];
      bl.req["m"] = (*bl_graph)[1];
    }
    bl.req["mode"] = *bl_mode;
  });

  auto& hy = make_sub("hybrids", "single-qubit hybrid games 1..7");
  auto hy_game = std::make_shared<int>(0);
  hy.sub->add_option("--game", *hy_game, "game index")->required()->check(CLI::Range(1, 7));
  hy.sub->callback([&hy, hy_game] { hy.req["game"] = *hy_game; });

  auto& bb = make_sub("basis-blindness", "hidden-bit guessing estimators");
  auto bb_kind = std::make_shared<std::string>("4");
  auto bb_guesser = std::make_shared<std::string>("blind");
  bb.sub->add_option("--kind", *bb_kind, "4 | 8")->check(CLI::IsMember({"4", "8"}));
  bb.sub->add_option("--guesser", *bb_guesser, "blind | brute")
      ->check(CLI::IsMember({"blind", "brute"}));
  bb.sub->callback([&bb, bb_kind, bb_guesser] {
    bb.req["kind"] = *bb_kind;
    bb.req["guesser"] = *bb_guesser;
  });

  auto& de = make_sub("describe", "state-description recovery from transcripts");
  auto de_target = std::make_shared<std::string>("qfactory4");
  auto de_method = std::make_shared<std::string>("trapdoor");
  auto de_family = std::make_shared<std::string>("toy");
  de.sub->add_option("--target", *de_target, "qfactory4 | qfactory8")
      ->check(CLI::IsMember({"qfactory4", "qfactory8"}));
  de.sub->add_option("--method", *de_method, "trapdoor | brute | blind")
      ->check(CLI::IsMember({"trapdoor", "brute", "blind"}));
  de.sub->add_option("--family", *de_family, "toy | lwe")
      ->check(CLI::IsMember({"toy", "lwe"}));
  de.sub->callback([&de, de_target, de_method, de_family] {
    de.req["target"] = *de_target;
    de.req["method"] = *de_method;
    de.req["family"] = *de_family;
  });

  auto& cb = make_sub("cloning-bound", "grid search over measure-and-prepare copiers",
                      /*with_trials=*/false);
  auto cb_res = std::make_shared<int>(1000);
  cb.sub->add_option("--resolution", *cb_res, "grid points per axis")
      ->check(CLI::Range(2, 100000));
  cb.sub->callback([&cb, cb_res] { cb.req["resolution"] = *cb_res; });

  auto& si = make_sub("signaling", "guess-the-hidden-angle-class game");
  auto si_strategy = std::make_shared<std::string>("constant");
  auto si_leak = std::make_shared<bool>(false);
  si.sub->add_option("--strategy", *si_strategy, "constant | random")
      ->check(CLI::IsMember({"constant", "random"}));
  si.sub->add_flag("--leak", *si_leak, "hand the hidden angle to the strategy");
  si.sub->callback([&si, si_strategy, si_leak] {
    si.req["strategy"] = *si_strategy;
    si.req["leak"] = *si_leak;
  });

  make_sub("verify-lemmas", "exhaustive identity and rewrite checks",
           /*with_trials=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  SubSpec* chosen = nullptr;
  for (auto& s : specs)
    if (s->sub->parsed()) chosen = s.get();
  if (!chosen) {
    std::cerr << "error: no subcommand selected\n";
    return 1;
  }
  apply_common(chosen->req, chosen->opts);

  qfu_ctx* ctx = qfu_ctx_new();
  if (!ctx) {
    std::cerr << "error: cannot allocate context\n";
    return 1;
  }
  char* raw = qfu_run(ctx, chosen->req.dump().c_str());
  if (!raw) {
    std::cerr << "error: " << qfu_last_error(ctx) << "\n";
    const int rc = qfu_last_error_code(ctx) == QFU_ERR_USAGE ? 1 : 2;
    qfu_ctx_free(ctx);
    return rc;
  }
  json report = json::parse(raw);
  qfu_string_free(raw);
  qfu_ctx_free(ctx);

  const std::string text = report.dump();
  if (!chosen->opts.output.empty()) {
    std::ofstream out(chosen->opts.output);
    if (!out) {
      std::cerr << "error: cannot write " << chosen->opts.output << "\n";
      return 1;
    }
    out << text << "\n";
  } else {
    std::cout << text << "\n";
  }
  if (!chosen->opts.csv.empty()) {
    try {
      write_csv(chosen->opts.csv, report);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  if (report.contains("all_passed") && !report["all_passed"].get<bool>()) return 2;
  return 0;
}
