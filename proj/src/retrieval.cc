#include "relkit/retrieval.h"

#include <algorithm>

#include "relkit/error.h"

namespace relkit {

RelDescriptor build_descriptor(const ModelParams &params, const VocabEmbeddings &emb,
                               const ImageRecord &image, const DescriptorOptions &options) {
  RelDescriptor out;
  out.image_id = image.image_id;
  PredictOptions po;
  po.labels_per_box = options.labels_per_box;
  po.score_mode = options.score_mode;
  const auto preds = predict_image(params, emb, image, po);

  // Predictions arrive best first, so the first sighting of a triple is its max.
  std::vector<std::pair<Triple, double>> best;
  std::set<Triple> seen;
  for (const auto &p : preds) {
    if (static_cast<int>(best.size()) >= options.n) break;
    if (!(p.score > 0.0)) break;
    if (seen.insert(p.triple).second) best.push_back({p.triple, p.score});
  }
  if (best.empty()) return out;
  const double top = best.front().second;
  for (const auto &[t, score] : best) out.entries[t] = score / top;
  out.entries[best.front().first] = 1.0;
  return out;
}

double matching_score(const RelDescriptor &q, const RelDescriptor &c) {
  double total = 0.0;
  auto a = q.entries.begin();
  auto b = c.entries.begin();
  while (a != q.entries.end() && b != c.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      total += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return total;
}

std::vector<RankedImage> rank_descriptors(const RelDescriptor &query,
                                          const std::vector<RelDescriptor> &candidates) {
  std::vector<RankedImage> out;
  for (const auto &c : candidates) {
    if (c.image_id == query.image_id) continue;
    out.push_back({c.image_id, matching_score(query, c)});
  }
  if (out.empty()) throw Error(ErrorKind::kEmptyCorpus, "no retrieval candidates");
  std::sort(out.begin(), out.end(), [](const RankedImage &a, const RankedImage &b) {
    return a.score != b.score ? a.score > b.score : a.image_id < b.image_id;
  });
  return out;
}

std::vector<RankedImage> rank_corpus(const ModelParams &params, const VocabEmbeddings &emb,
                                     const ImageRecord &query, const Corpus &corpus,
                                     const DescriptorOptions &options) {
  std::vector<RelDescriptor> candidates;
  candidates.reserve(corpus.images.size());
  for (const auto &image : corpus.images) {
    if (image.image_id == query.image_id) continue;
    candidates.push_back(build_descriptor(params, emb, image, options));
  }
  return rank_descriptors(build_descriptor(params, emb, query, options), candidates);
}

RetrievalReport retrieval_metrics(const std::vector<QueryRanking> &rankings,
                                  const std::map<std::string, std::set<std::string>> &relevance) {
  if (rankings.empty()) throw Error(ErrorKind::kInvalidArgument, "no queries");
  std::vector<int> first_ranks;
  for (const auto &q : rankings) {
    auto it = relevance.find(q.query_id);
    if (it == relevance.end() || it->second.empty()) {
      throw Error(ErrorKind::kMissingRelevance, q.query_id);
    }
    int rank = 0;
    for (std::size_t n = 0; n < q.ranking.size(); ++n) {
      if (it->second.contains(q.ranking[n].image_id)) {
        rank = static_cast<int>(n) + 1;
        break;
      }
    }
    if (rank == 0) throw Error(ErrorKind::kMissingRelevance, q.query_id + ": no relevant candidate ranked");
    first_ranks.push_back(rank);
  }
  RetrievalReport report;
  report.queries = first_ranks.size();
  const double n = static_cast<double>(first_ranks.size());
  auto recall = [&](int k) {
    return static_cast<double>(std::count_if(first_ranks.begin(), first_ranks.end(),
                                             [k](int r) { return r <= k; })) / n;
  };
  report.recall_at_1 = recall(1);
  report.recall_at_5 = recall(5);
  report.recall_at_10 = recall(10);
  std::sort(first_ranks.begin(), first_ranks.end());
  report.median_rank = first_ranks[(first_ranks.size() - 1) / 2];
  return report;
}

std::map<std::string, std::set<std::string>> dominant_triple_relevance(const Corpus &corpus) {
  std::map<Triple, std::set<std::string>> by_triple;
  for (const auto &image : corpus.images) {
    if (!image.ground_truth.empty()) by_triple[image.ground_truth.front().triple()].insert(image.image_id);
  }
  std::map<std::string, std::set<std::string>> out;
  for (const auto &image : corpus.images) {
    if (image.ground_truth.empty()) continue;
    auto ids = by_triple[image.ground_truth.front().triple()];
    ids.erase(image.image_id);
    out[image.image_id] = std::move(ids);
  }
  return out;
}

}  // namespace relkit
