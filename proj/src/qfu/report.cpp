#include "qfu/harness.hpp"

#include <json.hpp>

namespace qfu {

std::string GameReport::to_json() const {
  nlohmann::json j;
  j["game_id"] = game_id;
  j["trials"] = trials;
  j["wins"] = wins;
  j["win_rate"] = win_rate;
  j["ci95"] = {ci95.first, ci95.second};
  j["notes"] = notes;
  return j.dump();
}

GameReport make_report(std::string game_id, int trials, int wins, std::string notes) {
  GameReport r;
  r.game_id = std::move(game_id);
  r.trials = trials;
  r.wins = wins;
  r.win_rate = trials > 0 ? double(wins) / trials : 0.0;
  r.ci95 = wilson_interval(wins, trials);
  r.notes = std::move(notes);
  return r;
}

}  // namespace qfu
