#ifndef RELKIT_SYNTHETIC_H_
#define RELKIT_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/model.h"

namespace relkit {

// Knobs of the synthetic relationship world.
struct SynthConfig {
  int num_objects = 20;
  int num_predicates = 10;
  int feature_dim = 32;
  int embedding_dim = 16;
  int train_images = 500;
  int test_images = 200;
  double validation_fraction = 0.1;  // extra images drawn like train
  int relations_per_image = 3;
  int distractors_per_image = 1;     // detections that take part in no relation
  double share_object_prob = 0.3;    // a relation reuses an existing box of its class
  int triple_types = 60;             // support of the triple distribution
  double zipf_exponent = 1.0;
  int clusters = 4;                  // semantic clusters of object embeddings
  int predicate_groups = 5;          // visually confusable predicate groups
  double embedding_noise = 0.35;     // spread of objects around their cluster centre
  double predicate_specificity = 1.0;  // predicate-specific part of W* relative to the shared part
  double prototype_spread = 1.0;     // distance of predicate prototypes from their group centre
  double feature_noise = 2.0;
  double detection_noise = 0.3;
  double label_confusion = 0.1;      // chance a detector peaks on a cluster-mate
  double box_jitter = 0.05;
  int hold_out = 0;                  // triple types that only occur in test

  // Throws InfeasibleConfig.
  void validate() const;
};

struct SyntheticData {
  Corpus train;
  Corpus validation;
  Corpus test;
  EmbeddingTable embeddings;
  ModelParams truth;                   // Theta* (prototypes) and W* (plausibility)
  std::vector<Triple> support;         // triple types by plausibility rank
  std::vector<Triple> held_out;
};

// Deterministic for a fixed (config, seed).
SyntheticData generate_synthetic(const SynthConfig &config, std::uint64_t seed);

}  // namespace relkit

#endif  // RELKIT_SYNTHETIC_H_
