#ifndef RELKIT_CORPUS_H_
#define RELKIT_CORPUS_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "relkit/types.h"

namespace relkit {

// Object categories and predicates; indices into these lists are the i, j
// and k of a Triple.
struct CategoryVocabulary {
  std::vector<std::string> objects;
  std::vector<std::string> predicates;

  int num_objects() const { return static_cast<int>(objects.size()); }
  int num_predicates() const { return static_cast<int>(predicates.size()); }

  // Throws InvalidArgument on empty lists or duplicate names.
  void validate() const;

  bool operator==(const CategoryVocabulary &) const = default;
};

struct Detection {
  Box box;
  Vec class_scores;  // one likelihood in [0,1] per object category

  bool operator==(const Detection &) const = default;
};

// Predicate feature of the union region of an ordered detection pair.
struct PairFeature {
  int o1 = 0;
  int o2 = 0;
  Vec feature;

  bool operator==(const PairFeature &) const = default;
};

struct GroundTruthRel {
  Box subject_box;
  int i = 0;
  int k = 0;
  int j = 0;
  Box object_box;

  Triple triple() const { return {i, k, j}; }
  bool operator==(const GroundTruthRel &) const = default;
};

// Predicate feature of the union of a ground-truth relationship's two boxes.
struct GtPairFeature {
  int gt = 0;
  Vec feature;

  bool operator==(const GtPairFeature &) const = default;
};

struct ImageRecord {
  std::string image_id;
  std::vector<Detection> detections;
  std::vector<PairFeature> pair_features;
  std::vector<GroundTruthRel> ground_truth;
  std::vector<GtPairFeature> gt_pair_features;

  // Feature of ground-truth relationship `gt`, or nullptr when not supplied.
  const Vec *gt_feature(int gt) const;

  bool operator==(const ImageRecord &) const = default;
};

struct Corpus {
  CategoryVocabulary vocabulary;
  int feature_dim = 0;
  std::vector<ImageRecord> images;
  std::string split;  // "train", "test", ... ; empty when untagged

  std::size_t gt_count() const;
  const ImageRecord *find(const std::string &image_id) const;

  bool operator==(const Corpus &) const = default;
};

inline constexpr const char *kCorpusFormat = "relkit-corpus/1";

// Checks every structural invariant of the corpus. Reported line numbers
// follow the JSONL layout: image n (0-based) lives on line n + 2.
void validate_corpus(const Corpus &corpus);

Corpus read_corpus(std::istream &in);
Corpus load_corpus(const std::filesystem::path &path);
void write_corpus(std::ostream &out, const Corpus &corpus);
void write_corpus(const std::filesystem::path &path, const Corpus &corpus);

using TripleCounts = std::map<Triple, int>;

TripleCounts triple_frequency(const Corpus &train);

// Triple types annotated in `test` that never occur in `train`.
std::set<Triple> zero_shot_triples(const Corpus &train, const Corpus &test);

}  // namespace relkit

#endif  // RELKIT_CORPUS_H_
