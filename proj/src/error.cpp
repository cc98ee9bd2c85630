#include "egame/error.hpp"

namespace egame {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kRingMismatch: return "ring_mismatch";
    case Errc::kParse: return "parse";
    case Errc::kDimensionMismatch: return "dimension_mismatch";
    case Errc::kInvalidIndex: return "invalid_index";
    case Errc::kNotElementary: return "not_elementary";
    case Errc::kNoInverseWitness: return "no_inverse_witness";
    case Errc::kNotInverse: return "not_inverse";
    case Errc::kUnknownPattern: return "unknown_pattern";
    case Errc::kUnsupportedConjugator: return "unsupported_conjugator";
    case Errc::kCertificateFailed: return "certificate_failed";
    case Errc::kMoveRejected: return "move_rejected";
    case Errc::kTranscriptMalformed: return "transcript_malformed";
    case Errc::kTranscriptUnsound: return "transcript_unsound";
    case Errc::kInvalidAction: return "invalid_action";
    case Errc::kEmptyInput: return "empty_input";
    case Errc::kInvalidArgument: return "invalid_argument";
    case Errc::kIo: return "io";
  }
  return "unknown";
}

}  // namespace egame
