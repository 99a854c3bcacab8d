#include "relkit/eval.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "relkit/error.h"
#include "relkit/parallel.h"
#include "relkit/training.h"

namespace relkit {

std::string_view eval_mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::kPredicate: return "predicate";
    case EvalMode::kPhrase: return "phrase";
    case EvalMode::kRelationship: return "relationship";
  }
  return "predicate";
}

EvalMode parse_eval_mode(std::string_view name) {
  if (name == "predicate") return EvalMode::kPredicate;
  if (name == "phrase") return EvalMode::kPhrase;
  if (name == "relationship") return EvalMode::kRelationship;
  throw Error(ErrorKind::kInvalidArgument, "unknown eval mode '" + std::string(name) + "'");
}

double EvalReport::recall_at(int k) const {
  for (std::size_t n = 0; n < k_list.size(); ++n) {
    if (k_list[n] == k) return recall[n];
  }
  throw Error(ErrorKind::kInvalidArgument, "recall@" + std::to_string(k) + " not computed");
}

ScoredImage scored_image(const ImageRecord &image, int num_objects, int num_predicates,
                         EvalMode mode) {
  ScoredImage out;
  if (mode != EvalMode::kPredicate) {
    out.image = image;
    return out;
  }
  const TrainingUnit unit = make_training_unit(image, num_objects, num_predicates, GtLikelihood::kOne);
  out.image.image_id = image.image_id;
  for (std::size_t p = 0; p < unit.pairs.size(); ++p) {
    const auto &pair = unit.pairs[p];
    Detection subject{unit.subject_boxes[p], Vec(num_objects, 0.0)};
    Detection object{unit.object_boxes[p], Vec(num_objects, 0.0)};
    subject.class_scores[pair.subject_label] = 1.0;
    object.class_scores[pair.object_label] = 1.0;
    out.image.detections.push_back(std::move(subject));
    out.image.detections.push_back(std::move(object));
    const int o1 = static_cast<int>(2 * p);
    out.image.pair_features.push_back({o1, o1 + 1, pair.feature});
  }
  out.gt_pair = unit.gt_pair;
  out.fixed_labels = true;
  return out;
}

std::vector<Prediction> rank_image(const ModelParams &params, const VocabEmbeddings &emb,
                                   const ScoredImage &scored, const EvalOptions &options,
                                   int top_n) {
  PredictOptions po;
  po.top_n = top_n;
  po.labels_per_box = scored.fixed_labels ? 1 : options.labels_per_box;
  po.max_per_pair = options.max_per_pair;
  po.score_mode = options.score_mode;
  return predict_image(params, emb, scored.image, po);
}

std::vector<int> greedy_match(std::span<const Prediction> predictions, const ScoredImage &scored,
                              const ImageRecord &source, EvalMode mode, double iou_threshold,
                              const std::vector<char> *eligible) {
  const auto &gts = source.ground_truth;
  std::vector<char> taken(gts.size(), 0);
  std::vector<int> out(predictions.size(), -1);
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const Prediction &pred = predictions[p];
    int best = -1;
    double best_overlap = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || (eligible != nullptr && !(*eligible)[g])) continue;
      const auto &gt = gts[g];
      if (gt.triple() != pred.triple) continue;
      double overlap = 0.0;
      switch (mode) {
        case EvalMode::kPredicate:
          if (scored.gt_pair[g] * 2 != pred.o1) continue;
          overlap = 1.0;
          break;
        case EvalMode::kPhrase:
          overlap = iou(union_box(pred.box1, pred.box2), union_box(gt.subject_box, gt.object_box));
          if (overlap < iou_threshold) continue;
          break;
        case EvalMode::kRelationship: {
          const double s = iou(pred.box1, gt.subject_box);
          const double o = iou(pred.box2, gt.object_box);
          if (s < iou_threshold || o < iou_threshold) continue;
          overlap = std::min(s, o);
          break;
        }
      }
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[best] = 1;
      out[p] = best;
    }
  }
  return out;
}

namespace {

std::vector<char> eligibility(const ImageRecord &image, const std::set<Triple> *restrict_to) {
  std::vector<char> mask(image.ground_truth.size(), 1);
  if (restrict_to == nullptr) return mask;
  for (std::size_t g = 0; g < mask.size(); ++g) {
    mask[g] = restrict_to->contains(image.ground_truth[g].triple());
  }
  return mask;
}

EvalReport evaluate_impl(const ModelParams &params, const VocabEmbeddings &emb,
                         const Corpus &test, EvalMode mode, const EvalOptions &options,
                         const std::set<Triple> *restrict_to) {
  if (test.images.empty()) throw Error(ErrorKind::kEmptyTestSet, "no images");
  if (options.k_list.empty()) throw Error(ErrorKind::kInvalidArgument, "empty k list");
  const int max_k = *std::max_element(options.k_list.begin(), options.k_list.end());
  const int N = test.vocabulary.num_objects();
  const int K = test.vocabulary.num_predicates();

  // Per image: GT count and the rank of every match.
  std::vector<std::size_t> gt_counts(test.images.size(), 0);
  std::vector<std::vector<int>> match_ranks(test.images.size());
  parallel_for(test.images.size(), options.threads, [&](std::size_t m) {
    const auto &image = test.images[m];
    const auto mask = eligibility(image, restrict_to);
    gt_counts[m] = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    if (gt_counts[m] == 0) return;
    const ScoredImage scored = scored_image(image, N, K, mode);
    const auto preds = rank_image(params, emb, scored, options, max_k);
    const auto matches = greedy_match(preds, scored, image, mode, options.iou_threshold, &mask);
    for (std::size_t p = 0; p < matches.size(); ++p) {
      if (matches[p] >= 0) match_ranks[m].push_back(static_cast<int>(p));
    }
  });

  EvalReport report;
  report.mode = mode;
  report.k_list = options.k_list;
  report.matched.assign(options.k_list.size(), 0);
  for (std::size_t m = 0; m < test.images.size(); ++m) {
    report.gt_total += gt_counts[m];
    for (int rank : match_ranks[m]) {
      for (std::size_t n = 0; n < options.k_list.size(); ++n) {
        if (rank < options.k_list[n]) ++report.matched[n];
      }
    }
  }
  if (report.gt_total == 0) throw Error(ErrorKind::kEmptyTestSet, "no ground truth to recall");
  for (std::size_t matched : report.matched) {
    report.recall.push_back(static_cast<double>(matched) / static_cast<double>(report.gt_total));
  }
  return report;
}

}  // namespace

EvalReport evaluate(const ModelParams &params, const VocabEmbeddings &emb, const Corpus &test,
                    EvalMode mode, const EvalOptions &options) {
  return evaluate_impl(params, emb, test, mode, options, nullptr);
}

EvalReport evaluate_zero_shot(const ModelParams &params, const VocabEmbeddings &emb,
                              const Corpus &train, const Corpus &test, EvalMode mode,
                              const EvalOptions &options) {
  const auto unseen = zero_shot_triples(train, test);
  if (unseen.empty()) throw Error(ErrorKind::kNoZeroShotTriples, "every test triple occurs in training");
  EvalReport report = evaluate_impl(params, emb, test, mode, options, &unseen);
  report.zero_shot = true;
  return report;
}

double average_precision(std::span<const char> hits, std::size_t positives) {
  if (positives == 0) return 0.0;
  std::vector<double> precision(hits.size());
  std::vector<double> recall(hits.size());
  std::size_t tp = 0;
  for (std::size_t n = 0; n < hits.size(); ++n) {
    tp += hits[n] ? 1 : 0;
    precision[n] = static_cast<double>(tp) / static_cast<double>(n + 1);
    recall[n] = static_cast<double>(tp) / static_cast<double>(positives);
  }
  // Precision envelope, then sum precision over recall increments.
  for (std::size_t n = hits.size(); n-- > 1;) precision[n - 1] = std::max(precision[n - 1], precision[n]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t n = 0; n < hits.size(); ++n) {
    if (recall[n] > prev_recall) {
      ap += (recall[n] - prev_recall) * precision[n];
      prev_recall = recall[n];
    }
  }
  return ap;
}

double mean_average_precision(const ModelParams &params, const VocabEmbeddings &emb,
                              const Corpus &test, EvalMode mode, const EvalOptions &options,
                              const std::set<Triple> *restrict_to) {
  if (test.images.empty()) throw Error(ErrorKind::kEmptyTestSet, "no images");
  const int N = test.vocabulary.num_objects();
  const int K = test.vocabulary.num_predicates();

  struct Entry {
    double score;
    std::size_t image;
    std::size_t rank;
    int k;
    bool hit;
  };
  // Greedy matching inside each image already visits a class's predictions
  // in descending score, so the per-image hits equal those of a class-wise
  // sweep over the pooled list.
  std::vector<std::vector<Entry>> per_image(test.images.size());
  std::vector<std::vector<std::size_t>> positives(test.images.size(),
                                                  std::vector<std::size_t>(K, 0));
  parallel_for(test.images.size(), options.threads, [&](std::size_t m) {
    const auto &image = test.images[m];
    const auto mask = eligibility(image, restrict_to);
    for (std::size_t g = 0; g < mask.size(); ++g) {
      if (mask[g]) ++positives[m][image.ground_truth[g].k];
    }
    const ScoredImage scored = scored_image(image, N, K, mode);
    const auto preds = rank_image(params, emb, scored, options, 0);
    const auto matches = greedy_match(preds, scored, image, mode, options.iou_threshold, &mask);
    for (std::size_t p = 0; p < preds.size(); ++p) {
      per_image[m].push_back({preds[p].score, m, p, preds[p].triple.k, matches[p] >= 0});
    }
  });

  std::vector<std::vector<Entry>> by_class(K);
  std::vector<std::size_t> class_positives(K, 0);
  for (std::size_t m = 0; m < test.images.size(); ++m) {
    for (int k = 0; k < K; ++k) class_positives[k] += positives[m][k];
    for (const Entry &e : per_image[m]) by_class[e.k].push_back(e);
  }

  double total = 0.0;
  int classes = 0;
  for (int k = 0; k < K; ++k) {
    if (class_positives[k] == 0) continue;
    auto &entries = by_class[k];
    std::sort(entries.begin(), entries.end(), [](const Entry &a, const Entry &b) {
      if (a.score != b.score) return a.score > b.score;
      return std::tie(a.image, a.rank) < std::tie(b.image, b.rank);
    });
    std::vector<char> hits;
    hits.reserve(entries.size());
    for (const auto &e : entries) hits.push_back(e.hit);
    total += average_precision(hits, class_positives[k]);
    ++classes;
  }
  if (classes == 0) throw Error(ErrorKind::kEmptyTestSet, "no ground truth for mAP");
  return total / classes;
}

double random_guess_recall(double candidates, int k) {
  return std::min(static_cast<double>(k), candidates) / candidates;
}

std::string format_results_table(std::span<const ResultRow> rows) {
  std::size_t name_width = 4;
  for (const auto &row : rows) name_width = std::max(name_width, row.name.size());
  std::ostringstream head1, head2, body;
  char buf[64];
  head1 << std::string(name_width, ' ');
  head2 << std::string(name_width, ' ');
  if (!rows.empty()) {
    for (const auto &report : rows.front().reports) {
      std::vector<int> ks = report.k_list;
      std::sort(ks.rbegin(), ks.rend());
      std::string title = std::string(eval_mode_name(report.mode)) + (report.zero_shot ? " (zs)" : "");
      const std::size_t width = ks.size() * 9;
      std::snprintf(buf, sizeof(buf), " | %-*s", static_cast<int>(width - 1), title.c_str());
      head1 << buf;
      head2 << " |";
      for (int k : ks) {
        std::snprintf(buf, sizeof(buf), " %8s", ("R@" + std::to_string(k)).c_str());
        head2 << buf;
      }
      if (report.mean_ap) {
        head1 << std::string(9, ' ');
        head2 << "      mAP";
      }
    }
  }
  for (const auto &row : rows) {
    std::snprintf(buf, sizeof(buf), "%-*s", static_cast<int>(name_width), row.name.c_str());
    body << buf;
    for (const auto &report : row.reports) {
      std::vector<int> ks = report.k_list;
      std::sort(ks.rbegin(), ks.rend());
      body << " |";
      for (int k : ks) {
        std::snprintf(buf, sizeof(buf), " %8.2f", 100.0 * report.recall_at(k));
        body << buf;
      }
      if (report.mean_ap) {
        std::snprintf(buf, sizeof(buf), " %8.2f", 100.0 * *report.mean_ap);
        body << buf;
      }
    }
    body << '\n';
  }
  return head1.str() + '\n' + head2.str() + '\n' + body.str();
}

std::string results_to_json(std::span<const ResultRow> rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto &row : rows) {
    nlohmann::ordered_json r;
    r["model"] = row.name;
    r["reports"] = nlohmann::ordered_json::array();
    for (const auto &report : row.reports) {
      nlohmann::ordered_json j;
      j["mode"] = eval_mode_name(report.mode);
      j["zero_shot"] = report.zero_shot;
      j["gt_total"] = report.gt_total;
      nlohmann::ordered_json recall = nlohmann::ordered_json::object();
      for (std::size_t n = 0; n < report.k_list.size(); ++n) {
        recall["R@" + std::to_string(report.k_list[n])] = report.recall[n];
      }
      j["recall"] = recall;
      j["matched"] = report.matched;
      if (report.mean_ap) j["mAP"] = *report.mean_ap;
      r["reports"].push_back(j);
    }
    out.push_back(r);
  }
  return out.dump(2);
}

}  // namespace relkit
