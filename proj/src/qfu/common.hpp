#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfu {

using cplx = std::complex<double>;

enum class Err {
  BadTarget,
  DimMismatch,
  ZeroNorm,
  NotTracePreserving,
  EmptySet,
  LengthMismatch,
  ArityMismatch,
  MissingDeviation,
  ScheduleViolation,
  NotTwoPreimages,
  InversionFailed,
  DecodeAmbiguous,
  TranscriptMismatch,
  BadDims,
  BadIndex,
  TooLarge,
  NotSupported,
  AdversaryProtocolViolation,
  Usage,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::BadTarget: return "BadTarget";
    case Err::DimMismatch: return "DimMismatch";
    case Err::ZeroNorm: return "ZeroNorm";
    case Err::NotTracePreserving: return "NotTracePreserving";
    case Err::EmptySet: return "EmptySet";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::ArityMismatch: return "ArityMismatch";
    case Err::MissingDeviation: return "MissingDeviation";
    case Err::ScheduleViolation: return "ScheduleViolation";
    case Err::NotTwoPreimages: return "NotTwoPreimages";
    case Err::InversionFailed: return "InversionFailed";
    case Err::DecodeAmbiguous: return "DecodeAmbiguous";
    case Err::TranscriptMismatch: return "TranscriptMismatch";
    case Err::BadDims: return "BadDims";
    case Err::BadIndex: return "BadIndex";
    case Err::TooLarge: return "TooLarge";
    case Err::NotSupported: return "NotSupported";
    case Err::AdversaryProtocolViolation: return "AdversaryProtocolViolation";
    case Err::Usage: return "Usage";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

using Bits = std::vector<uint8_t>;  // each element 0 or 1

inline int parity(const Bits& a) {
  int p = 0;
  for (uint8_t v : a) p ^= (v & 1);
  return p;
}

inline int dot2(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw Error(Err::LengthMismatch, "dot2: length mismatch");
  int p = 0;
  for (size_t i = 0; i < a.size(); ++i) p ^= (a[i] & b[i] & 1);
  return p;
}

inline Bits xor_bits(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw Error(Err::LengthMismatch, "xor_bits: length mismatch");
  Bits r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = (a[i] ^ b[i]) & 1;
  return r;
}

std::string base64_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> base64_decode(const std::string& text);
std::string hex_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> hex_decode(const std::string& text);

}  // namespace qfu
