#ifndef RELKIT_TRAINING_H_
#define RELKIT_TRAINING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/model.h"

namespace relkit {

// Where the detection likelihoods P_i(O) of ground-truth boxes come from:
// the stored detection that best overlaps the box (IoU >= 0.5, else 1), or a
// constant 1.
enum class GtLikelihood { kDetector, kOne };

// Search direction of the block steps.
enum class DescentDirection { kSubgradient, kQuasiNewton };

// Which terms a training run optimizes. kFull is C + l1 L + l2 K; kVisualOnly
// trains C with f fixed at 1; kLanguageOnly trains l1 L alone.
enum class TrainVariant { kFull, kVisualOnly, kLanguageOnly };

std::string_view variant_name(TrainVariant v);
TrainVariant parse_variant(std::string_view name);

struct TrainingConfig {
  double lambda1 = 0.05;
  double lambda2 = 0.002;
  int variance_sample_count = 500000;
  int frequency_pair_count = 50000;
  double lr_visual = 1e-3;
  double lr_language = 1e-3;
  int max_iterations = 25;
  int inner_steps = 200;  // descent steps per block per outer iteration
  bool step_halving = true;
  double min_step = 1e-8;
  DescentDirection direction = DescentDirection::kQuasiNewton;
  int memory = 10;  // curvature pairs kept by the quasi-Newton direction
  double tolerance = 1e-6;  // relative objective change that stops training
  bool resample_each_iteration = false;
  GtLikelihood gt_likelihood = GtLikelihood::kDetector;
  TrainVariant variant = TrainVariant::kFull;
  Activation activation = Activation::kSoftmax;
  double init_scale = 0.01;
  double init_bias = 1.0;  // starting b_k, which sets the starting scale of f
  std::uint64_t seed = 1;
  int threads = 1;
};

struct VariancePair {
  Triple a;
  Triple b;
  double distance = 0.0;  // d(a, b) > 0

  bool operator==(const VariancePair &) const = default;
};

struct FrequencyPair {
  Triple frequent;  // freq(frequent) > freq(rare)
  Triple rare;

  bool operator==(const FrequencyPair &) const = default;
};

struct PairSample {
  std::vector<VariancePair> variance;
  std::vector<FrequencyPair> frequency;
};

// Uniform pairs over the whole triple space, rejecting d(R, R') = 0.
std::vector<VariancePair> sample_variance_pairs(const VocabEmbeddings &emb, int n,
                                                std::uint64_t seed);

// Strictly frequency-ordered pairs. Half of the rare sides come from observed
// triples of lower count, half from triples never observed.
std::vector<FrequencyPair> sample_frequency_pairs(const TripleCounts &freq,
                                                  const CategoryVocabulary &vocabulary, int n,
                                                  std::uint64_t seed);

// One image's ground truth recast for the ranking loss: the distinct ordered
// GT box pairs with their features, fixed box labels and likelihoods, and the
// (pair, predicate) cells that are annotated.
struct TrainingUnit {
  struct Pair {
    int subject_label = 0;
    int object_label = 0;
    double p_subject = 1.0;
    double p_object = 1.0;
    Vec feature;
  };
  std::vector<Pair> pairs;
  std::vector<std::pair<int, int>> positives;  // (pair, k), one per GT instance
  std::vector<char> annotated;                 // pairs.size() x K
  std::vector<int> gt_pair;                    // GT index -> pair index
  std::vector<Box> subject_boxes;              // per pair
  std::vector<Box> object_boxes;
};

// Throws MissingGtFeature when a GT relationship has no pair feature.
TrainingUnit make_training_unit(const ImageRecord &image, int num_objects, int num_predicates,
                                GtLikelihood likelihood);
std::vector<TrainingUnit> make_training_units(const Corpus &corpus, GtLikelihood likelihood);

// Active-set fingerprint of the piecewise losses; two parameter points with
// equal signatures lie in the same smooth piece.
using ActivitySignature = std::vector<std::int64_t>;

// Each loss returns its value and, when `grad` is non-null, adds
// scale * (sub)gradient into it. At a hinge boundary the zero side is taken.
double loss_K(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const VariancePair> pairs, ModelParams *grad = nullptr,
              double scale = 1.0);
double loss_L(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const FrequencyPair> pairs, ModelParams *grad = nullptr,
              double scale = 1.0, ActivitySignature *signature = nullptr);

struct RankLossOptions {
  bool language_fixed = false;  // f == 1 (visual-only training)
  int threads = 1;
};
double loss_C(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const TrainingUnit> units, const RankLossOptions &options = {},
              ModelParams *grad = nullptr, double scale = 1.0,
              ActivitySignature *signature = nullptr);
double loss_C(const ModelParams &params, const VocabEmbeddings &emb, const Corpus &train,
              GtLikelihood likelihood = GtLikelihood::kDetector);

struct LossBreakdown {
  double C = 0.0;
  double L = 0.0;
  double K = 0.0;
  double objective = 0.0;
};

// The combined objective over a fixed training set and fixed pair sample.
class TrainingProblem {
 public:
  TrainingProblem(const Corpus &train, const VocabEmbeddings &emb, PairSample samples,
                  const TrainingConfig &config);
  TrainingProblem(std::vector<TrainingUnit> units, const VocabEmbeddings &emb,
                  PairSample samples, const TrainingConfig &config);

  LossBreakdown evaluate(const ModelParams &params) const;
  // Objective plus its full subgradient with respect to every parameter.
  LossBreakdown gradient(const ModelParams &params, ModelParams &grad,
                         ActivitySignature *signature = nullptr) const;

  const PairSample &samples() const { return samples_; }
  void set_samples(PairSample samples) { samples_ = std::move(samples); }
  const TrainingConfig &config() const { return config_; }
  const VocabEmbeddings &embeddings() const { return emb_; }
  std::span<const TrainingUnit> units() const { return units_; }

 private:
  LossBreakdown compute(const ModelParams &params, ModelParams *grad,
                        ActivitySignature *signature) const;

  std::vector<TrainingUnit> units_;
  const VocabEmbeddings &emb_;
  PairSample samples_;
  TrainingConfig config_;
};

PairSample draw_samples(const Corpus &train, const VocabEmbeddings &emb,
                        const TrainingConfig &config, std::uint64_t seed);

// Small random Theta and w, with every b_k = init_bias.
ModelParams initial_params(int num_predicates, int feature_dim, int embedding_dim,
                           const TrainingConfig &config);

struct IterationLog {
  int iteration = 0;
  LossBreakdown loss;
  double lr_visual = 0.0;
  double lr_language = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<IterationLog> history;  // entry 0 is the initial point
  bool converged = false;
};

// Alternating block descent: Theta through C with W fixed, then W through
// the full objective with Theta fixed.
TrainResult train(const Corpus &train, const VocabEmbeddings &emb, const TrainingConfig &config);

// Tab-separated: iteration, C, L, K, objective, lr_visual, lr_language.
std::string format_training_log(const std::vector<IterationLog> &history);

}  // namespace relkit

#endif  // RELKIT_TRAINING_H_
