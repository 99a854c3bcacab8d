#ifndef RELKIT_GRADCHECK_H_
#define RELKIT_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/model.h"
#include "relkit/training.h"

namespace relkit {

enum class LossSelector { kC, kL, kK, kObjective };

std::string_view loss_selector_name(LossSelector s);

// A small self-contained training problem for derivative checks.
struct GradcheckFixture {
  CategoryVocabulary vocabulary;
  EmbeddingTable table;
  Corpus corpus;
  PairSample samples;
  ModelParams params;
  TrainingConfig config;
};

// Random fixture (three objects, three predicates, two images, five GT
// triples) with parameters drawn at a generic, non-kink point.
GradcheckFixture make_gradcheck_fixture(std::uint64_t seed,
                                        Activation activation = Activation::kSoftmax);

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::string worst_coordinate;
  double analytic = 0.0;  // at the worst coordinate
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;  // coordinates whose probe crossed a kink, excluded

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

// Central differences over every parameter coordinate against the analytic
// subgradient of the selected loss. A coordinate whose +h / -h probes land in
// different active sets is reported as a kink and left out of the maximum.
// The relative error is |a - n| / max(|a|, |n|, 1e-6 * max(1, |g|_inf)).
// `tamper` edits the analytic gradient before comparison (test hook).
GradcheckResult finite_difference_check(LossSelector selector, const GradcheckFixture &fixture,
                                        double h,
                                        const std::function<void(ModelParams &)> &tamper = {});

}  // namespace relkit

#endif  // RELKIT_GRADCHECK_H_
