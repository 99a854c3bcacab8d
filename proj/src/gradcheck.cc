#include "relkit/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "relkit/rng.h"

namespace relkit {

std::string_view loss_selector_name(LossSelector s) {
  switch (s) {
    case LossSelector::kC: return "C";
    case LossSelector::kL: return "L";
    case LossSelector::kK: return "K";
    case LossSelector::kObjective: return "objective";
  }
  return "objective";
}

GradcheckFixture make_gradcheck_fixture(std::uint64_t seed, Activation activation) {
  constexpr int kObjects = 3;
  constexpr int kPredicates = 3;
  constexpr int kDim = 3;
  constexpr int kFeatureDim = 4;
  Rng rng(seed * 104729 + 17);

  GradcheckFixture fx;
  for (int n = 0; n < kObjects; ++n) fx.vocabulary.objects.push_back("obj" + std::to_string(n));
  for (int n = 0; n < kPredicates; ++n) fx.vocabulary.predicates.push_back("pred" + std::to_string(n));
  fx.table = EmbeddingTable(kDim);
  for (const auto *list : {&fx.vocabulary.objects, &fx.vocabulary.predicates}) {
    for (const auto &name : *list) {
      Vec v(kDim);
      for (double &x : v) x = rng.normal();
      fx.table.add(name, v);
    }
  }

  fx.corpus.vocabulary = fx.vocabulary;
  fx.corpus.feature_dim = kFeatureDim;
  fx.corpus.split = "train";
  auto random_box = [&] {
    const double x = rng.uniform(0, 200), y = rng.uniform(0, 200);
    return Box{x, y, x + rng.uniform(20, 80), y + rng.uniform(20, 80)};
  };
  auto random_vec = [&](int n) {
    Vec v(n);
    for (double &x : v) x = rng.normal();
    return v;
  };
  // Five GT triples over two images; image 0 shares a subject box.
  const int gt_per_image[2] = {3, 2};
  for (int m = 0; m < 2; ++m) {
    ImageRecord image;
    image.image_id = "fixture" + std::to_string(m);
    std::vector<std::pair<Box, int>> objects;
    for (int g = 0; g < gt_per_image[m]; ++g) {
      GroundTruthRel gt;
      if (g == 1 && m == 0) {
        gt.subject_box = image.ground_truth[0].subject_box;
        gt.i = image.ground_truth[0].i;
      } else {
        gt.subject_box = random_box();
        gt.i = rng.index(kObjects);
      }
      gt.object_box = random_box();
      gt.j = rng.index(kObjects);
      gt.k = rng.index(kPredicates);
      image.ground_truth.push_back(gt);
      image.gt_pair_features.push_back({g, random_vec(kFeatureDim)});
      for (const Box &box : {gt.subject_box, gt.object_box}) {
        Detection det{box, Vec(kObjects)};
        for (double &p : det.class_scores) p = rng.uniform(0.05, 1.0);
        image.detections.push_back(det);
      }
    }
    fx.corpus.images.push_back(std::move(image));
  }

  fx.config.activation = activation;
  fx.config.variance_sample_count = 40;
  fx.config.frequency_pair_count = 20;
  fx.samples = draw_samples(fx.corpus, VocabEmbeddings(fx.vocabulary, fx.table), fx.config, seed);

  fx.params = ModelParams(kPredicates, kFeatureDim, kDim, activation);
  for (double &v : fx.params.values()) v = rng.normal();
  for (int k = 0; k < kPredicates; ++k) fx.params.b(k) = 1.0 + rng.normal();
  return fx;
}

GradcheckResult finite_difference_check(LossSelector selector, const GradcheckFixture &fixture,
                                        double h,
                                        const std::function<void(ModelParams &)> &tamper) {
  const VocabEmbeddings emb(fixture.vocabulary, fixture.table);
  const auto units = make_training_units(fixture.corpus, fixture.config.gt_likelihood);
  TrainingConfig config = fixture.config;
  config.variant = TrainVariant::kFull;
  const TrainingProblem problem(units, emb, fixture.samples, config);

  auto value = [&](const ModelParams &p, ModelParams *grad, ActivitySignature *sig) {
    switch (selector) {
      case LossSelector::kC: return loss_C(p, emb, units, {}, grad, 1.0, sig);
      case LossSelector::kL: return loss_L(p, emb, fixture.samples.frequency, grad, 1.0, sig);
      case LossSelector::kK: return loss_K(p, emb, fixture.samples.variance, grad, 1.0);
      case LossSelector::kObjective: {
        ModelParams scratch = p.zeros_like();
        return problem.gradient(p, grad != nullptr ? *grad : scratch, sig).objective;
      }
    }
    return 0.0;
  };

  ModelParams analytic = fixture.params.zeros_like();
  ActivitySignature base;
  value(fixture.params, &analytic, &base);
  if (tamper) tamper(analytic);

  double g_inf = 0.0;
  for (double g : analytic.values()) g_inf = std::max(g_inf, std::abs(g));
  const double floor = 1e-6 * std::max(1.0, g_inf);

  GradcheckResult result;
  ModelParams probe = fixture.params;
  for (std::size_t n = 0; n < probe.values().size(); ++n) {
    const double original = probe.values()[n];
    ActivitySignature sig_plus, sig_minus;
    probe.values()[n] = original + h;
    const double plus = value(probe, nullptr, &sig_plus);
    probe.values()[n] = original - h;
    const double minus = value(probe, nullptr, &sig_minus);
    probe.values()[n] = original;
    if (sig_plus != base || sig_minus != base) {
      ++result.kinks;
      continue;
    }
    ++result.checked;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic.values()[n];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    if (result.worst_coordinate.empty() || rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_coordinate = probe.coordinate_name(n);
      result.analytic = a;
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace relkit
