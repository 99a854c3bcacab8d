#include "relkit/error.h"

namespace relkit {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kMissingEmbedding: return "MissingEmbedding";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kDuplicateImageId: return "DuplicateImageId";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kFeatureDimMismatch: return "FeatureDimMismatch";
    case ErrorKind::kVocabularyMismatch: return "VocabularyMismatch";
    case ErrorKind::kInfeasibleConfig: return "InfeasibleConfig";
    case ErrorKind::kEmptySample: return "EmptySample";
    case ErrorKind::kMissingGtFeature: return "MissingGtFeature";
    case ErrorKind::kDegenerateVocabulary: return "DegenerateVocabulary";
    case ErrorKind::kDegenerateFrequencies: return "DegenerateFrequencies";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kEmptyTestSet: return "EmptyTestSet";
    case ErrorKind::kNoZeroShotTriples: return "NoZeroShotTriples";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kMissingRelevance: return "MissingRelevance";
    case ErrorKind::kGradientMismatch: return "GradientMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &detail)
    : std::runtime_error(std::string(error_kind_name(kind)) +
                         (detail.empty() ? "" : ": " + detail)),
      kind_(kind),
      detail_(detail) {}

}  // namespace relkit
