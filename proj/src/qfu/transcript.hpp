#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qfu/common.hpp"

namespace qfu {

// A protocol message: classical bytes, or a handle to an in-process quantum
// register. Quantum payloads are never serialized; the handle is an index
// into a session-owned registry, which is what lets a classical channel
// reject them outright.
struct Message {
  enum class Kind { Classical, QHandle };
  Kind kind = Kind::Classical;
  std::vector<uint8_t> payload;  // classical bytes, or the handle id bytes
  int qhandle = -1;

  static Message classical(std::vector<uint8_t> bytes) {
    return {Kind::Classical, std::move(bytes), -1};
  }
  static Message classical_bits(const Bits& bits) {
    return {Kind::Classical, std::vector<uint8_t>(bits.begin(), bits.end()), -1};
  }
  static Message quantum(int handle) {
    return {Kind::QHandle, {uint8_t(handle & 0xff), uint8_t((handle >> 8) & 0xff)},
            handle};
  }
  Bits as_bits() const { return Bits(payload.begin(), payload.end()); }
};

// The distinguished protocol-level error constant (it is data, not a C++
// error).
Message err_message();
bool is_err_message(const Message& m);

struct Event {
  int round = 0;
  char from = 'A';  // 'A' | 'B' | 'R'
  Message msg;
};

struct Transcript {
  uint64_t session = 0;  // seed
  std::vector<Event> messages;

  void add(int round, char from, Message m) { messages.push_back({round, from, std::move(m)}); }
  std::string to_json() const;
  static Transcript from_json(const std::string& text);
};

}  // namespace qfu
