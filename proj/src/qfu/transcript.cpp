#include "qfu/transcript.hpp"

#include <json.hpp>

namespace qfu {

using nlohmann::json;

Message err_message() {
  return Message::classical({'E', 'R', 'R'});
}

bool is_err_message(const Message& m) {
  return m.kind == Message::Kind::Classical && m.payload == std::vector<uint8_t>{'E', 'R', 'R'};
}

std::string Transcript::to_json() const {
  json j;
  j["session"] = session;
  j["messages"] = json::array();
  for (const Event& e : messages) {
    j["messages"].push_back({{"round", e.round},
                             {"from", std::string(1, e.from)},
                             {"kind", e.msg.kind == Message::Kind::Classical ? "classical"
                                                                             : "qhandle"},
                             {"payload", hex_encode(e.msg.payload)}});
  }
  return j.dump();
}

Transcript Transcript::from_json(const std::string& text) {
  json j = json::parse(text);
  Transcript t;
  t.session = j.at("session");
  for (const auto& m : j.at("messages")) {
    Event e;
    e.round = m.at("round");
    e.from = std::string(m.at("from"))[0];
    e.msg.kind = m.at("kind") == "classical" ? Message::Kind::Classical : Message::Kind::QHandle;
    e.msg.payload = hex_decode(m.at("payload"));
    if (e.msg.kind == Message::Kind::QHandle && e.msg.payload.size() >= 2)
      e.msg.qhandle = e.msg.payload[0] | (int(e.msg.payload[1]) << 8);
    t.messages.push_back(std::move(e));
  }
  return t;
}

}  // namespace qfu
