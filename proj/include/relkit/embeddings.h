#ifndef RELKIT_EMBEDDINGS_H_
#define RELKIT_EMBEDDINGS_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "relkit/corpus.h"
#include "relkit/types.h"

namespace relkit {

// Pretrained word vectors keyed by category name. Immutable once built.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  // Adds or replaces an entry; throws DimMismatch on a wrong length and
  // InvalidArgument on non-finite components.
  void add(const std::string &name, Vec vector);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view name) const;

  // Throws MissingEmbedding.
  std::span<const double> at(std::string_view name) const;

  // [vec(ti), vec(tj)]; order matters.
  Vec concat_pair(std::string_view ti, std::string_view tj) const;

  const std::map<std::string, Vec, std::less<>> &entries() const { return entries_; }

 private:
  std::size_t dim_;
  std::map<std::string, Vec, std::less<>> entries_;
};

// File keys replace spaces in names by underscores.
std::string embedding_key(std::string_view name);

// Parses "name v1 ... v_dim" lines. Keeps only vocabulary terms but checks
// the width of every row.
EmbeddingTable load_embeddings(const std::filesystem::path &path,
                               const CategoryVocabulary &vocabulary);
void write_embeddings(const std::filesystem::path &path, const EmbeddingTable &table);

// 1 - cos(u, v), clamped to [0, 2]. Throws ZeroVector / DimMismatch.
double cosine_distance(std::span<const double> u, std::span<const double> v);

// Sum of position-wise cosine distances of subject, predicate and object.
double relationship_distance(const Triple &a, const Triple &b,
                             const CategoryVocabulary &vocabulary,
                             const EmbeddingTable &table);

// Embeddings resolved to vocabulary indices, with the pairwise cosine
// distances cached so that d(R, R') is three table lookups.
class VocabEmbeddings {
 public:
  VocabEmbeddings(const CategoryVocabulary &vocabulary, const EmbeddingTable &table);

  int num_objects() const { return static_cast<int>(objects_.size()); }
  int num_predicates() const { return static_cast<int>(predicates_.size()); }
  std::size_t dim() const { return dim_; }

  std::span<const double> object(int i) const { return objects_[i]; }
  std::span<const double> predicate(int k) const { return predicates_[k]; }

  double object_distance(int a, int b) const { return object_dist_[a * num_objects() + b]; }
  double predicate_distance(int a, int b) const {
    return predicate_dist_[a * num_predicates() + b];
  }
  double distance(const Triple &a, const Triple &b) const {
    return object_distance(a.i, b.i) + predicate_distance(a.k, b.k) + object_distance(a.j, b.j);
  }

 private:
  std::size_t dim_;
  std::vector<Vec> objects_;
  std::vector<Vec> predicates_;
  Vec object_dist_;
  Vec predicate_dist_;
};

}  // namespace relkit

#endif  // RELKIT_EMBEDDINGS_H_
