#ifndef RELKIT_EVAL_H_
#define RELKIT_EVAL_H_

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/geometry.h"
#include "relkit/model.h"

namespace relkit {

enum class EvalMode { kPredicate, kPhrase, kRelationship };

std::string_view eval_mode_name(EvalMode m);
EvalMode parse_eval_mode(std::string_view name);
inline constexpr EvalMode kAllEvalModes[] = {EvalMode::kPhrase, EvalMode::kRelationship,
                                             EvalMode::kPredicate};

struct EvalOptions {
  std::vector<int> k_list = {50, 100};
  double iou_threshold = 0.5;
  int labels_per_box = 1;
  int max_per_pair = 1;  // predictions kept per pair: the per-pair argmax
  ScoreMode score_mode = ScoreMode::kJoint;
  int threads = 1;
};

struct EvalReport {
  EvalMode mode = EvalMode::kPredicate;
  std::vector<int> k_list;
  std::vector<double> recall;        // parallel to k_list
  std::vector<std::size_t> matched;  // parallel to k_list
  std::size_t gt_total = 0;
  std::optional<double> mean_ap;
  bool zero_shot = false;

  double recall_at(int k) const;
};

// The candidate image a mode scores. Predicate mode rebuilds it from the
// ground truth: every distinct ordered GT pair becomes detections 2p, 2p+1
// with one-hot labels, so GT class labels are fixed and P = 1.
struct ScoredImage {
  ImageRecord image;
  std::vector<int> gt_pair;  // predicate mode: GT index -> pair p
  bool fixed_labels = false; // predicate mode scores only the GT labels
};
ScoredImage scored_image(const ImageRecord &image, int num_objects, int num_predicates,
                         EvalMode mode);

// Ranked predictions of one image; top_n = 0 keeps all.
std::vector<Prediction> rank_image(const ModelParams &params, const VocabEmbeddings &emb,
                                   const ScoredImage &scored, const EvalOptions &options,
                                   int top_n);

// Greedy one-to-one matching in prediction order. Each prediction takes the
// unmatched eligible GT with equal labels, passing geometry and the largest
// overlap (ties to the lower GT index). Returns the matched GT index per
// prediction, -1 where none. `eligible` (optional) masks the GT list.
std::vector<int> greedy_match(std::span<const Prediction> predictions, const ScoredImage &scored,
                              const ImageRecord &source, EvalMode mode, double iou_threshold,
                              const std::vector<char> *eligible = nullptr);

// Recall@k over the corpus for every k in options.k_list.
EvalReport evaluate(const ModelParams &params, const VocabEmbeddings &emb, const Corpus &test,
                    EvalMode mode, const EvalOptions &options = {});

// Per-predicate-class average precision (all-point interpolated) averaged
// over classes with at least one GT.
double mean_average_precision(const ModelParams &params, const VocabEmbeddings &emb,
                              const Corpus &test, EvalMode mode, const EvalOptions &options = {},
                              const std::set<Triple> *restrict_to = nullptr);

// Recall restricted to GT whose triple never occurs in `train`; predictions
// are ranked over the full candidate set.
EvalReport evaluate_zero_shot(const ModelParams &params, const VocabEmbeddings &emb,
                              const Corpus &train, const Corpus &test, EvalMode mode,
                              const EvalOptions &options = {});

// Area under an interpolated precision/recall curve given per-detection hit
// flags in score order and the number of positives.
double average_precision(std::span<const char> hits, std::size_t positives);

// Expected recall@k when one GT hides among `candidates` uniformly scored ones.
double random_guess_recall(double candidates, int k);

struct ResultRow {
  std::string name;
  std::vector<EvalReport> reports;  // one per mode
};

// Aligned table: one row per model variant, columns mode x R@k (percent).
std::string format_results_table(std::span<const ResultRow> rows);
std::string results_to_json(std::span<const ResultRow> rows);

}  // namespace relkit

#endif  // RELKIT_EVAL_H_
