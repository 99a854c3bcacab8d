#ifndef RELKIT_ERROR_H_
#define RELKIT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace relkit {

// Every failure the library reports carries one of these kinds so callers
// (and the CLI exit path) can branch on it without parsing messages.
enum class ErrorKind {
  kIoError,
  kInvalidArgument,
  kMissingEmbedding,
  kDimMismatch,
  kZeroVector,
  kParseError,
  kDuplicateImageId,
  kIndexOutOfRange,
  kFeatureDimMismatch,
  kVocabularyMismatch,
  kInfeasibleConfig,
  kEmptySample,
  kMissingGtFeature,
  kDegenerateVocabulary,
  kDegenerateFrequencies,
  kNonFiniteLoss,
  kEmptyTestSet,
  kNoZeroShotTriples,
  kEmptyCorpus,
  kMissingRelevance,
  kGradientMismatch,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &detail);

  ErrorKind kind() const { return kind_; }
  const std::string &detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace relkit

#endif  // RELKIT_ERROR_H_
