#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace egame {

enum class Errc {
  kRingMismatch,
  kParse,
  kDimensionMismatch,
  kInvalidIndex,
  kNotElementary,
  kNoInverseWitness,
  kNotInverse,
  kUnknownPattern,
  kUnsupportedConjugator,
  kCertificateFailed,
  kMoveRejected,
  kTranscriptMalformed,
  kTranscriptUnsound,
  kInvalidAction,
  kEmptyInput,
  kInvalidArgument,
  kIo,
};

std::string_view errc_name(Errc code);

// All library failures surface as egame::Error; code() identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace egame
