#ifndef RELKIT_RETRIEVAL_H_
#define RELKIT_RETRIEVAL_H_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/model.h"

namespace relkit {

// An image summarized by its n most confident relationship types, scores
// divided by the image's best score.
struct RelDescriptor {
  std::string image_id;
  std::map<Triple, double> entries;
};

struct DescriptorOptions {
  int n = 100;
  int labels_per_box = 1;
  ScoreMode score_mode = ScoreMode::kJoint;
};

// Top-n distinct triples by best score over all pairs; duplicates keep their
// max. Only positive scores enter, so every entry lies in (0, 1] and the best
// one is exactly 1.
RelDescriptor build_descriptor(const ModelParams &params, const VocabEmbeddings &emb,
                               const ImageRecord &image, const DescriptorOptions &options = {});

// Sum over shared triples of the score products.
double matching_score(const RelDescriptor &q, const RelDescriptor &c);

struct RankedImage {
  std::string image_id;
  double score = 0.0;
};

// Candidates (the query's own id excluded) by matching score descending,
// ties by image_id ascending.
std::vector<RankedImage> rank_descriptors(const RelDescriptor &query,
                                          const std::vector<RelDescriptor> &candidates);

std::vector<RankedImage> rank_corpus(const ModelParams &params, const VocabEmbeddings &emb,
                                     const ImageRecord &query, const Corpus &corpus,
                                     const DescriptorOptions &options = {});

struct RetrievalReport {
  double recall_at_1 = 0.0;
  double recall_at_5 = 0.0;
  double recall_at_10 = 0.0;
  int median_rank = 0;
  std::size_t queries = 0;
};

struct QueryRanking {
  std::string query_id;
  std::vector<RankedImage> ranking;
};

// R@k: fraction of queries with a relevant id in the top k. Median rank of
// the first relevant id, 1-based; for an even count the lower middle value.
RetrievalReport retrieval_metrics(const std::vector<QueryRanking> &rankings,
                                  const std::map<std::string, std::set<std::string>> &relevance);

// Relevance by shared dominant triple (the first GT relationship).
std::map<std::string, std::set<std::string>> dominant_triple_relevance(const Corpus &corpus);

}  // namespace relkit

#endif  // RELKIT_RETRIEVAL_H_
