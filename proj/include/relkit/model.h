#ifndef RELKIT_MODEL_H_
#define RELKIT_MODEL_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/types.h"

namespace relkit {

enum class Activation { kSoftmax, kRawLinear };

std::string_view activation_name(Activation a);
Activation parse_activation(std::string_view name);

// How a candidate relationship is scored. kJoint is V * f; the other two are
// the single-module ablations.
enum class ScoreMode { kJoint, kVisualOnly, kLanguageOnly };

std::string_view score_mode_name(ScoreMode m);
ScoreMode parse_score_mode(std::string_view name);

// Visual parameters {z_k, s_k} and language parameters {w_k, b_k} for K
// predicates, stored in one flat buffer laid out as z | s | w | b so that
// gradients and finite-difference probes can address every coordinate.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(int num_predicates, int feature_dim, int embedding_dim,
              Activation activation = Activation::kSoftmax);

  int num_predicates() const { return K_; }
  int feature_dim() const { return D_; }
  int embedding_dim() const { return dim_; }
  int language_dim() const { return 2 * dim_; }
  Activation activation() const { return activation_; }
  void set_activation(Activation a) { activation_ = a; }

  std::span<double> z(int k) { return {values_.data() + k * D_, static_cast<std::size_t>(D_)}; }
  std::span<const double> z(int k) const {
    return {values_.data() + k * D_, static_cast<std::size_t>(D_)};
  }
  double &s(int k) { return values_[s_offset() + k]; }
  double s(int k) const { return values_[s_offset() + k]; }
  std::span<double> w(int k) {
    return {values_.data() + w_offset() + k * language_dim(),
            static_cast<std::size_t>(language_dim())};
  }
  std::span<const double> w(int k) const {
    return {values_.data() + w_offset() + k * language_dim(),
            static_cast<std::size_t>(language_dim())};
  }
  double &b(int k) { return values_[b_offset() + k]; }
  double b(int k) const { return values_[b_offset() + k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  // The Theta block (z and s) and the W block (w and b).
  std::span<double> visual_block() { return std::span<double>(values_).first(w_offset()); }
  std::span<double> language_block() { return std::span<double>(values_).subspan(w_offset()); }
  std::size_t visual_size() const { return w_offset(); }

  // Human-readable name of flat coordinate n, e.g. "w[3][17]".
  std::string coordinate_name(std::size_t n) const;

  ModelParams zeros_like() const;
  bool all_finite() const;

  bool operator==(const ModelParams &) const = default;

 private:
  std::size_t s_offset() const { return static_cast<std::size_t>(K_) * D_; }
  std::size_t w_offset() const { return s_offset() + K_; }
  std::size_t b_offset() const { return w_offset() + static_cast<std::size_t>(K_) * language_dim(); }

  int K_ = 0;
  int D_ = 0;
  int dim_ = 0;
  Activation activation_ = Activation::kSoftmax;
  Vec values_;
};

// Per-predicate likelihoods of a union-box feature: z_k . x + s_k, passed
// through a max-shifted softmax over k in softmax mode.
Vec predicate_activation(const ModelParams &params, std::span<const double> feature);

// V = P_i * activation_k(feature) * P_j.
double visual_score(const ModelParams &params, const Triple &t, double p_i, double p_j,
                    std::span<const double> feature);

// f = w_k . [e_i, e_j] + b_k.
double project_f(const ModelParams &params, const VocabEmbeddings &emb, const Triple &t);

// f for every triple, via the per-(k, object) half products of w_k.
class LanguageProjection {
 public:
  LanguageProjection(const ModelParams &params, const VocabEmbeddings &emb);

  double operator()(const Triple &t) const {
    return left_[t.k * N_ + t.i] + right_[t.k * N_ + t.j] + bias_[t.k];
  }

 private:
  int N_;
  Vec left_;
  Vec right_;
  Vec bias_;
};

struct Prediction {
  Triple triple;
  int o1 = 0;  // detection indices within the scored image
  int o2 = 0;
  Box box1;
  Box box2;
  double score = 0.0;
  double visual = 0.0;
  double language = 0.0;
};

// Ranking order: score descending, then (k, i, j, o1, o2) ascending.
bool ranks_before(const Prediction &a, const Prediction &b);

struct PredictOptions {
  int top_n = 0;           // 0 keeps every candidate
  int labels_per_box = 1;  // top-c object labels tried per detection
  int max_per_pair = 0;    // 0 keeps every candidate of a pair; 1 is the per-pair argmax
  ScoreMode score_mode = ScoreMode::kJoint;
};

// Scores every supplied ordered pair against its candidate labels and all K
// predicates, returning the best predictions in ranking order.
std::vector<Prediction> predict_image(const ModelParams &params, const VocabEmbeddings &emb,
                                      const ImageRecord &image, const PredictOptions &options = {});

// Indices of the c highest class scores, ties to the lower index.
std::vector<int> top_labels(std::span<const double> class_scores, int c);

inline constexpr const char *kModelFormat = "relkit-model/1";

std::string model_to_json(const ModelParams &params);
ModelParams model_from_json(std::string_view text);
void save_model(const std::filesystem::path &path, const ModelParams &params);
ModelParams load_model(const std::filesystem::path &path);

}  // namespace relkit

#endif  // RELKIT_MODEL_H_
