#include "relkit/training.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>

#include "relkit/error.h"
#include "relkit/geometry.h"
#include "relkit/parallel.h"
#include "relkit/rng.h"

namespace relkit {

std::string_view variant_name(TrainVariant v) {
  switch (v) {
    case TrainVariant::kFull: return "full";
    case TrainVariant::kVisualOnly: return "visual-only";
    case TrainVariant::kLanguageOnly: return "language-only";
  }
  return "full";
}

TrainVariant parse_variant(std::string_view name) {
  if (name == "full") return TrainVariant::kFull;
  if (name == "visual-only" || name == "v") return TrainVariant::kVisualOnly;
  if (name == "language-only" || name == "l") return TrainVariant::kLanguageOnly;
  throw Error(ErrorKind::kInvalidArgument, "unknown training variant '" + std::string(name) + "'");
}

namespace {

Triple random_triple(Rng &rng, int n_objects, int n_predicates) {
  Triple t;
  t.i = rng.index(n_objects);
  t.k = rng.index(n_predicates);
  t.j = rng.index(n_objects);
  return t;
}

// Accumulates df/dW contributions as coefficients on (k, object) halves and
// biases, then expands them into the w rows once.
class LanguageGradient {
 public:
  LanguageGradient(int n_objects, int n_predicates)
      : N_(n_objects), left_(static_cast<std::size_t>(n_objects) * n_predicates, 0.0),
        right_(left_.size(), 0.0), bias_(n_predicates, 0.0) {}

  void add(const Triple &t, double coeff) {
    left_[t.k * N_ + t.i] += coeff;
    right_[t.k * N_ + t.j] += coeff;
    bias_[t.k] += coeff;
  }

  void flush(const VocabEmbeddings &emb, ModelParams &grad) const {
    const std::size_t dim = emb.dim();
    for (int k = 0; k < static_cast<int>(bias_.size()); ++k) {
      auto w = grad.w(k);
      for (int i = 0; i < N_; ++i) {
        if (left_[k * N_ + i] != 0.0) axpy(left_[k * N_ + i], emb.object(i), w.first(dim));
        if (right_[k * N_ + i] != 0.0) axpy(right_[k * N_ + i], emb.object(i), w.subspan(dim));
      }
      grad.b(k) += bias_[k];
    }
  }

 private:
  int N_;
  Vec left_;
  Vec right_;
  Vec bias_;
};

}  // namespace

std::vector<VariancePair> sample_variance_pairs(const VocabEmbeddings &emb, int n,
                                                std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "variance sample count must be >= 1");
  const int N = emb.num_objects();
  const int K = emb.num_predicates();
  bool any_distinct = false;
  for (int a = 1; a < N && !any_distinct; ++a) any_distinct = emb.object_distance(0, a) > 0.0;
  for (int a = 1; a < K && !any_distinct; ++a) any_distinct = emb.predicate_distance(0, a) > 0.0;
  if (!any_distinct) {
    throw Error(ErrorKind::kDegenerateVocabulary, "every pair of triples has distance 0");
  }
  Rng rng(seed);
  std::vector<VariancePair> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    const Triple a = random_triple(rng, N, K);
    const Triple b = random_triple(rng, N, K);
    const double d = emb.distance(a, b);
    if (d > 0.0) out.push_back({a, b, d});
  }
  return out;
}

std::vector<FrequencyPair> sample_frequency_pairs(const TripleCounts &freq,
                                                  const CategoryVocabulary &vocabulary, int n,
                                                  std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::kInvalidArgument, "frequency pair count must be >= 1");
  const int N = vocabulary.num_objects();
  const int K = vocabulary.num_predicates();
  const std::uint64_t space = static_cast<std::uint64_t>(N) * N * K;

  std::vector<std::pair<int, Triple>> observed;  // (count, triple), ascending
  for (const auto &[t, c] : freq) {
    if (c > 0) observed.push_back({c, t});
  }
  std::sort(observed.begin(), observed.end());
  const std::uint64_t unseen = space - observed.size();
  if (observed.empty() || (unseen == 0 && observed.front().first == observed.back().first)) {
    throw Error(ErrorKind::kDegenerateFrequencies, "all triples share one frequency");
  }

  // Observed triples that have at least one strictly rarer observed triple.
  std::vector<std::size_t> rarer_prefix(observed.size());
  std::vector<std::size_t> has_rarer;
  for (std::size_t n_obs = 0; n_obs < observed.size(); ++n_obs) {
    const auto it = std::lower_bound(observed.begin(), observed.end(),
                                     std::pair<int, Triple>{observed[n_obs].first, Triple{-1, -1, -1}});
    rarer_prefix[n_obs] = static_cast<std::size_t>(it - observed.begin());
    if (rarer_prefix[n_obs] > 0) has_rarer.push_back(n_obs);
  }

  std::vector<Triple> unseen_list;
  const bool enumerate_unseen = unseen > 0 && unseen * 4 < space;
  if (enumerate_unseen) {
    for (int i = 0; i < N; ++i) {
      for (int k = 0; k < K; ++k) {
        for (int j = 0; j < N; ++j) {
          if (!freq.contains({i, k, j}) || freq.at({i, k, j}) == 0) unseen_list.push_back({i, k, j});
        }
      }
    }
  }

  Rng rng(seed);
  std::vector<FrequencyPair> out;
  out.reserve(n);
  for (int s = 0; s < n; ++s) {
    const bool want_unseen = (s % 2 == 1 || has_rarer.empty()) && unseen > 0;
    if (!want_unseen) {
      const std::size_t hi = has_rarer[rng.below(has_rarer.size())];
      const std::size_t lo = rng.below(rarer_prefix[hi]);
      out.push_back({observed[hi].second, observed[lo].second});
      continue;
    }
    const Triple frequent = observed[rng.below(observed.size())].second;
    Triple rare;
    if (enumerate_unseen) {
      rare = unseen_list[rng.below(unseen_list.size())];
    } else {
      do {
        rare = random_triple(rng, N, K);
      } while (freq.contains(rare) && freq.at(rare) > 0);
    }
    out.push_back({frequent, rare});
  }
  return out;
}

TrainingUnit make_training_unit(const ImageRecord &image, int num_objects, int num_predicates,
                                GtLikelihood likelihood) {
  (void)num_objects;
  TrainingUnit unit;
  std::vector<std::pair<Box, int>> boxes;
  auto box_index = [&](const Box &box, int label) {
    for (std::size_t n = 0; n < boxes.size(); ++n) {
      if (boxes[n].first == box && boxes[n].second == label) return static_cast<int>(n);
    }
    boxes.push_back({box, label});
    return static_cast<int>(boxes.size()) - 1;
  };
  auto box_likelihood = [&](const Box &box, int label) {
    if (likelihood == GtLikelihood::kOne) return 1.0;
    double best = 0.0;
    const Detection *match = nullptr;
    for (const auto &det : image.detections) {
      const double overlap = iou(det.box, box);
      if (overlap > best) {
        best = overlap;
        match = &det;
      }
    }
    return (match != nullptr && best >= 0.5) ? match->class_scores[label] : 1.0;
  };

  std::map<std::pair<int, int>, int> pair_of;
  for (std::size_t n = 0; n < image.ground_truth.size(); ++n) {
    const auto &gt = image.ground_truth[n];
    const Vec *feature = image.gt_feature(static_cast<int>(n));
    if (feature == nullptr) {
      throw Error(ErrorKind::kMissingGtFeature, image.image_id + " gt " + std::to_string(n));
    }
    const int sb = box_index(gt.subject_box, gt.i);
    const int ob = box_index(gt.object_box, gt.j);
    auto [it, inserted] = pair_of.try_emplace({sb, ob}, static_cast<int>(unit.pairs.size()));
    if (inserted) {
      TrainingUnit::Pair pair;
      pair.subject_label = gt.i;
      pair.object_label = gt.j;
      pair.p_subject = box_likelihood(gt.subject_box, gt.i);
      pair.p_object = box_likelihood(gt.object_box, gt.j);
      pair.feature = *feature;
      unit.pairs.push_back(std::move(pair));
      unit.subject_boxes.push_back(gt.subject_box);
      unit.object_boxes.push_back(gt.object_box);
    }
    unit.positives.push_back({it->second, gt.k});
    unit.gt_pair.push_back(it->second);
  }
  unit.annotated.assign(unit.pairs.size() * num_predicates, 0);
  for (const auto &[p, k] : unit.positives) unit.annotated[p * num_predicates + k] = 1;
  return unit;
}

std::vector<TrainingUnit> make_training_units(const Corpus &corpus, GtLikelihood likelihood) {
  std::vector<TrainingUnit> units;
  units.reserve(corpus.images.size());
  for (const auto &image : corpus.images) {
    if (image.ground_truth.empty()) continue;
    units.push_back(make_training_unit(image, corpus.vocabulary.num_objects(),
                                       corpus.vocabulary.num_predicates(), likelihood));
  }
  return units;
}

double loss_K(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const VariancePair> pairs, ModelParams *grad, double scale) {
  if (pairs.empty()) throw Error(ErrorKind::kEmptySample, "variance sample");
  const LanguageProjection f(params, emb);
  const double n = static_cast<double>(pairs.size());
  Vec delta(pairs.size());
  Vec ratio(pairs.size());
  double mean = 0.0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    delta[p] = f(pairs[p].a) - f(pairs[p].b);
    ratio[p] = delta[p] * delta[p] / pairs[p].distance;
    mean += ratio[p];
  }
  mean /= n;
  double var = 0.0;
  for (double r : ratio) var += (r - mean) * (r - mean);
  var /= n;

  if (grad != nullptr) {
    LanguageGradient lg(emb.num_objects(), params.num_predicates());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      // d var / d r_p = 2 (r_p - mean) / n; the mean's own dependence cancels.
      const double c = scale * (2.0 / n) * (ratio[p] - mean) * 2.0 * delta[p] / pairs[p].distance;
      lg.add(pairs[p].a, c);
      lg.add(pairs[p].b, -c);
    }
    lg.flush(emb, *grad);
  }
  return var;
}

double loss_L(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const FrequencyPair> pairs, ModelParams *grad, double scale,
              ActivitySignature *signature) {
  if (pairs.empty()) throw Error(ErrorKind::kEmptySample, "frequency sample");
  const LanguageProjection f(params, emb);
  std::optional<LanguageGradient> lg;
  if (grad != nullptr) lg.emplace(emb.num_objects(), params.num_predicates());
  double total = 0.0;
  for (const auto &pair : pairs) {
    const double margin = f(pair.rare) - f(pair.frequent) + 1.0;
    if (signature != nullptr) signature->push_back(margin > 0.0);
    if (margin <= 0.0) continue;
    total += margin;
    if (lg) {
      lg->add(pair.rare, scale);
      lg->add(pair.frequent, -scale);
    }
  }
  if (lg) lg->flush(emb, *grad);
  return total;
}

namespace {

struct UnitResult {
  double loss = 0.0;
  ActivitySignature signature;
};

// Hinge of one image's ranking loss; adds scale * subgradient into grad.
UnitResult unit_rank_loss(const ModelParams &params, const VocabEmbeddings &emb,
                          const LanguageProjection *language, const TrainingUnit &unit,
                          ModelParams *grad, double scale, bool want_signature) {
  const int K = params.num_predicates();
  const std::size_t n_pairs = unit.pairs.size();
  std::vector<Vec> act(n_pairs);
  Vec f(n_pairs * K, 1.0);
  Vec score(n_pairs * K);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto &pair = unit.pairs[p];
    act[p] = predicate_activation(params, pair.feature);
    const double prob = pair.p_subject * pair.p_object;
    for (int k = 0; k < K; ++k) {
      if (language != nullptr) f[p * K + k] = (*language)({pair.subject_label, k, pair.object_label});
      score[p * K + k] = prob * act[p][k] * f[p * K + k];
    }
  }

  // The best negative is shared by every positive of the image: negatives are
  // all unannotated (pair, predicate) cells.
  std::size_t best = score.size();
  for (std::size_t c = 0; c < score.size(); ++c) {
    if (unit.annotated[c]) continue;
    if (best == score.size() || score[c] > score[best]) best = c;
  }
  const bool has_negative = best < score.size();

  UnitResult result;
  Vec dscore(grad != nullptr ? score.size() : 0, 0.0);
  for (const auto &[p, k] : unit.positives) {
    const std::size_t cell = p * K + k;
    const double margin = 1.0 - score[cell] + (has_negative ? score[best] : 0.0);
    if (want_signature) {
      result.signature.push_back(margin > 0.0);
      result.signature.push_back(static_cast<std::int64_t>(best));
    }
    if (margin <= 0.0) continue;
    result.loss += margin;
    if (grad != nullptr) {
      dscore[cell] -= scale;
      if (has_negative) dscore[best] += scale;
    }
  }
  if (grad == nullptr) return result;

  const std::size_t dim = emb.dim();
  Vec du(K);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto &pair = unit.pairs[p];
    const double prob = pair.p_subject * pair.p_object;
    bool touched = false;
    for (int k = 0; k < K; ++k) touched |= dscore[p * K + k] != 0.0;
    if (!touched) continue;

    // Through the activation.
    for (int k = 0; k < K; ++k) du[k] = dscore[p * K + k] * prob * f[p * K + k];
    if (params.activation() == Activation::kSoftmax) {
      double weighted = 0.0;
      for (int k = 0; k < K; ++k) weighted += du[k] * act[p][k];
      for (int k = 0; k < K; ++k) du[k] = act[p][k] * (du[k] - weighted);
    }
    for (int k = 0; k < K; ++k) {
      if (du[k] == 0.0) continue;
      axpy(du[k], pair.feature, grad->z(k));
      grad->s(k) += du[k];
    }

    // Through f.
    if (language == nullptr) continue;
    for (int k = 0; k < K; ++k) {
      const double df = dscore[p * K + k] * prob * act[p][k];
      if (df == 0.0) continue;
      auto w = grad->w(k);
      axpy(df, emb.object(pair.subject_label), w.first(dim));
      axpy(df, emb.object(pair.object_label), w.subspan(dim));
      grad->b(k) += df;
    }
  }
  return result;
}

constexpr std::size_t kUnitsPerChunk = 16;

}  // namespace

double loss_C(const ModelParams &params, const VocabEmbeddings &emb,
              std::span<const TrainingUnit> units, const RankLossOptions &options,
              ModelParams *grad, double scale, ActivitySignature *signature) {
  std::optional<LanguageProjection> language;
  if (!options.language_fixed) language.emplace(params, emb);
  const LanguageProjection *lp = language ? &*language : nullptr;

  const std::size_t chunks = (units.size() + kUnitsPerChunk - 1) / kUnitsPerChunk;
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<ModelParams> chunk_grad(grad != nullptr ? chunks : 0);
  std::vector<ActivitySignature> chunk_sig(signature != nullptr ? chunks : 0);
  parallel_for(chunks, options.threads, [&](std::size_t c) {
    ModelParams *g = nullptr;
    if (grad != nullptr) {
      chunk_grad[c] = params.zeros_like();
      g = &chunk_grad[c];
    }
    const std::size_t end = std::min(units.size(), (c + 1) * kUnitsPerChunk);
    for (std::size_t u = c * kUnitsPerChunk; u < end; ++u) {
      UnitResult r = unit_rank_loss(params, emb, lp, units[u], g, scale, signature != nullptr);
      chunk_loss[c] += r.loss;
      if (signature != nullptr) {
        chunk_sig[c].insert(chunk_sig[c].end(), r.signature.begin(), r.signature.end());
      }
    }
  });

  double total = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += chunk_loss[c];
    if (grad != nullptr) axpy(1.0, chunk_grad[c].values(), grad->values());
    if (signature != nullptr) signature->insert(signature->end(), chunk_sig[c].begin(), chunk_sig[c].end());
  }
  return total;
}

double loss_C(const ModelParams &params, const VocabEmbeddings &emb, const Corpus &train,
              GtLikelihood likelihood) {
  const auto units = make_training_units(train, likelihood);
  return loss_C(params, emb, units);
}

TrainingProblem::TrainingProblem(const Corpus &train, const VocabEmbeddings &emb,
                                 PairSample samples, const TrainingConfig &config)
    : TrainingProblem(make_training_units(train, config.gt_likelihood), emb, std::move(samples),
                      config) {}

TrainingProblem::TrainingProblem(std::vector<TrainingUnit> units, const VocabEmbeddings &emb,
                                 PairSample samples, const TrainingConfig &config)
    : units_(std::move(units)), emb_(emb), samples_(std::move(samples)), config_(config) {
  if (config_.lambda1 < 0.0 || config_.lambda2 < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "lambda1 and lambda2 must be >= 0");
  }
}

LossBreakdown TrainingProblem::evaluate(const ModelParams &params) const {
  return compute(params, nullptr, nullptr);
}

LossBreakdown TrainingProblem::gradient(const ModelParams &params, ModelParams &grad,
                                        ActivitySignature *signature) const {
  return compute(params, &grad, signature);
}

LossBreakdown TrainingProblem::compute(const ModelParams &params, ModelParams *grad,
                                       ActivitySignature *signature) const {
  const auto variant = config_.variant;
  const double l1 = config_.lambda1;
  const double l2 = config_.lambda2;
  RankLossOptions rank;
  rank.threads = config_.threads;
  rank.language_fixed = variant == TrainVariant::kVisualOnly;

  const bool c_counts = variant != TrainVariant::kLanguageOnly;
  const bool l_counts = variant != TrainVariant::kVisualOnly;
  const bool k_counts = variant == TrainVariant::kFull;

  LossBreakdown out;
  out.C = loss_C(params, emb_, units_, rank, c_counts ? grad : nullptr, 1.0, signature);
  out.L = loss_L(params, emb_, samples_.frequency, l_counts ? grad : nullptr, l1, signature);
  out.K = loss_K(params, emb_, samples_.variance, k_counts ? grad : nullptr, l2);
  switch (variant) {
    case TrainVariant::kFull: out.objective = out.C + l1 * out.L + l2 * out.K; break;
    case TrainVariant::kVisualOnly: out.objective = out.C; break;
    case TrainVariant::kLanguageOnly: out.objective = l1 * out.L; break;
  }
  return out;
}

PairSample draw_samples(const Corpus &train, const VocabEmbeddings &emb,
                        const TrainingConfig &config, std::uint64_t seed) {
  PairSample s;
  s.variance = sample_variance_pairs(emb, config.variance_sample_count, seed * 2 + 11);
  s.frequency = sample_frequency_pairs(triple_frequency(train), train.vocabulary,
                                       config.frequency_pair_count, seed * 2 + 12);
  return s;
}

ModelParams initial_params(int num_predicates, int feature_dim, int embedding_dim,
                           const TrainingConfig &config) {
  ModelParams params(num_predicates, feature_dim, embedding_dim, config.activation);
  Rng rng(config.seed * 7919 + 3);
  for (int k = 0; k < num_predicates; ++k) {
    for (double &v : params.z(k)) v = config.init_scale * rng.normal();
  }
  for (int k = 0; k < num_predicates; ++k) {
    for (double &v : params.w(k)) v = config.init_scale * rng.normal();
    params.b(k) = config.init_bias;
  }
  if (config.variant == TrainVariant::kVisualOnly) {
    for (int k = 0; k < num_predicates; ++k) std::fill(params.w(k).begin(), params.w(k).end(), 0.0);
  }
  return params;
}

namespace {

// Monotone descent on one parameter block. Each step moves along the
// negative subgradient, or along a limited-memory quasi-Newton direction
// built from the block's recent steps, and halves the step until the
// objective does not increase. Returns the block objective.
double block_descent(const TrainingProblem &problem, ModelParams &params, bool visual_block,
                     double &lr, double current, const TrainingConfig &config) {
  const bool quasi_newton = config.direction == DescentDirection::kQuasiNewton;
  std::vector<Vec> s_hist, y_hist;
  std::vector<double> rho_hist;
  Vec prev_x, prev_g;

  for (int step = 0; step < config.inner_steps; ++step) {
    ModelParams grad = params.zeros_like();
    current = problem.gradient(params, grad).objective;
    const auto gspan = visual_block ? grad.visual_block() : grad.language_block();
    const Vec g(gspan.begin(), gspan.end());
    if (std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) break;
    const auto xspan = visual_block ? params.visual_block() : params.language_block();
    const Vec x(xspan.begin(), xspan.end());

    Vec direction(g.size());
    double trial = lr;
    if (quasi_newton) {
      if (!prev_x.empty()) {
        Vec sv(x.size()), yv(x.size());
        for (std::size_t n = 0; n < x.size(); ++n) {
          sv[n] = x[n] - prev_x[n];
          yv[n] = g[n] - prev_g[n];
        }
        const double sy = dot(sv, yv);
        if (sy > 1e-12 * std::sqrt(dot(sv, sv) * dot(yv, yv))) {
          if (static_cast<int>(s_hist.size()) == config.memory) {
            s_hist.erase(s_hist.begin());
            y_hist.erase(y_hist.begin());
            rho_hist.erase(rho_hist.begin());
          }
          s_hist.push_back(std::move(sv));
          y_hist.push_back(std::move(yv));
          rho_hist.push_back(1.0 / sy);
        }
      }
      prev_x = x;
      prev_g = g;
      Vec q = g;
      if (!s_hist.empty()) {
        const int m = static_cast<int>(s_hist.size());
        std::vector<double> alpha(m);
        for (int n = m - 1; n >= 0; --n) {
          alpha[n] = rho_hist[n] * dot(s_hist[n], q);
          axpy(-alpha[n], y_hist[n], q);
        }
        const double gamma = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
        for (double &v : q) v *= gamma;
        for (int n = 0; n < m; ++n) {
          const double beta = rho_hist[n] * dot(y_hist[n], q);
          axpy(alpha[n] - beta, s_hist[n], q);
        }
        trial = 1.0;
      }
      if (dot(q, g) <= 0.0) {
        // Not a descent direction: fall back to the subgradient.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
        q = g;
        trial = lr;
      }
      for (std::size_t n = 0; n < q.size(); ++n) direction[n] = -q[n];
    } else {
      for (std::size_t n = 0; n < g.size(); ++n) direction[n] = -g[n];
    }

    while (true) {
      ModelParams candidate = params;
      auto block = visual_block ? candidate.visual_block() : candidate.language_block();
      axpy(trial, direction, block);
      const double value = problem.evaluate(candidate).objective;
      if (!config.step_halving) {
        if (!std::isfinite(value)) throw Error(ErrorKind::kNonFiniteLoss, "objective diverged");
        params = std::move(candidate);
        current = value;
        break;
      }
      if (std::isfinite(value) && value <= current) {
        params = std::move(candidate);
        current = value;
        if (!quasi_newton || s_hist.empty()) lr = trial;
        break;
      }
      trial *= 0.5;
      if (trial < config.min_step) {
        if (!quasi_newton || s_hist.empty()) lr = config.min_step;
        return current;
      }
    }
  }
  return current;
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

TrainResult train(const Corpus &train, const VocabEmbeddings &emb, const TrainingConfig &config) {
  if (train.images.empty()) throw Error(ErrorKind::kEmptyCorpus, "training corpus has no images");
  TrainingProblem problem(train, emb, draw_samples(train, emb, config, config.seed), config);

  TrainResult result;
  result.params = initial_params(train.vocabulary.num_predicates(), train.feature_dim,
                                 static_cast<int>(emb.dim()), config);
  double lr_visual = config.lr_visual;
  double lr_language = config.lr_language;

  LossBreakdown loss = problem.evaluate(result.params);
  if (!std::isfinite(loss.objective)) throw Error(ErrorKind::kNonFiniteLoss, "initial objective");
  result.history.push_back({0, loss, lr_visual, lr_language});

  double previous = loss.objective;
  for (int it = 1; it <= config.max_iterations; ++it) {
    if (config.resample_each_iteration) {
      problem.set_samples(draw_samples(train, emb, config, config.seed + it));
      previous = problem.evaluate(result.params).objective;
    }
    double current = previous;
    if (config.variant != TrainVariant::kLanguageOnly) {
      current = block_descent(problem, result.params, true, lr_visual, current, config);
    }
    if (config.variant != TrainVariant::kVisualOnly) {
      current = block_descent(problem, result.params, false, lr_language, current, config);
    }
    loss = problem.evaluate(result.params);
    if (!std::isfinite(loss.objective)) throw Error(ErrorKind::kNonFiniteLoss, "iteration " + std::to_string(it));
    result.history.push_back({it, loss, lr_visual, lr_language});

    const double change = std::abs(previous - loss.objective) /
                          std::max(std::abs(previous), std::numeric_limits<double>::min());
    previous = loss.objective;
    if (change < config.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::string format_training_log(const std::vector<IterationLog> &history) {
  std::string out = "# iteration\tC\tL\tK\tobjective\tlr_visual\tlr_language\n";
  for (const auto &h : history) {
    out += std::to_string(h.iteration) + '\t' + fmt(h.loss.C) + '\t' + fmt(h.loss.L) + '\t' +
           fmt(h.loss.K) + '\t' + fmt(h.loss.objective) + '\t' + fmt(h.lr_visual) + '\t' +
           fmt(h.lr_language) + '\n';
  }
  return out;
}

}  // namespace relkit
