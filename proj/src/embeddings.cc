#include "relkit/embeddings.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "relkit/error.h"

namespace relkit {

void EmbeddingTable::add(const std::string &name, Vec vector) {
  if (vector.size() != dim_) {
    throw Error(ErrorKind::kDimMismatch, name + ": expected " + std::to_string(dim_) +
                                             " components, got " + std::to_string(vector.size()));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, name + ": non-finite component");
  }
  entries_[name] = std::move(vector);
}

bool EmbeddingTable::contains(std::string_view name) const {
  return entries_.find(embedding_key(name)) != entries_.end();
}

std::span<const double> EmbeddingTable::at(std::string_view name) const {
  auto it = entries_.find(embedding_key(name));
  if (it == entries_.end()) throw Error(ErrorKind::kMissingEmbedding, std::string(name));
  return it->second;
}

Vec EmbeddingTable::concat_pair(std::string_view ti, std::string_view tj) const {
  auto a = at(ti);
  auto b = at(tj);
  Vec out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::string embedding_key(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), ' ', '_');
  return key;
}

EmbeddingTable load_embeddings(const std::filesystem::path &path,
                               const CategoryVocabulary &vocabulary) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());

  std::map<std::string, bool> wanted;
  for (const auto *list : {&vocabulary.objects, &vocabulary.predicates}) {
    for (const auto &name : *list) wanted[embedding_key(name)] = true;
  }

  EmbeddingTable table;
  std::string text;
  std::size_t line = 0;
  std::size_t dim = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    std::istringstream fields(text);
    std::string name;
    fields >> name;
    Vec values;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || end != token.data() + token.size()) {
        throw Error(ErrorKind::kParseError, "line " + std::to_string(line) + ": bad number '" +
                                                token + "'");
      }
      values.push_back(v);
    }
    if (dim == 0) {
      if (values.empty()) throw Error(ErrorKind::kDimMismatch, std::to_string(line));
      dim = values.size();
      table = EmbeddingTable(dim);
    } else if (values.size() != dim) {
      throw Error(ErrorKind::kDimMismatch, std::to_string(line));
    }
    if (wanted.contains(name)) table.add(name, std::move(values));
  }
  for (const auto *list : {&vocabulary.objects, &vocabulary.predicates}) {
    for (const auto &name : *list) {
      if (!table.contains(name)) throw Error(ErrorKind::kMissingEmbedding, name);
    }
  }
  return table;
}

void write_embeddings(const std::filesystem::path &path, const EmbeddingTable &table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  char buf[64];
  for (const auto &[name, vec] : table.entries()) {
    out << name;
    for (double v : vec) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, end - buf);
    }
    out << '\n';
  }
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::kDimMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorKind::kZeroVector, "");
  if (std::equal(u.begin(), u.end(), v.begin())) return 0.0;
  const double cos = dot(u, v) / (nu * nv);
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

double relationship_distance(const Triple &a, const Triple &b,
                             const CategoryVocabulary &vocabulary,
                             const EmbeddingTable &table) {
  const auto &obj = vocabulary.objects;
  const auto &pred = vocabulary.predicates;
  return cosine_distance(table.at(obj.at(a.i)), table.at(obj.at(b.i))) +
         cosine_distance(table.at(pred.at(a.k)), table.at(pred.at(b.k))) +
         cosine_distance(table.at(obj.at(a.j)), table.at(obj.at(b.j)));
}

VocabEmbeddings::VocabEmbeddings(const CategoryVocabulary &vocabulary,
                                 const EmbeddingTable &table)
    : dim_(table.dim()) {
  for (const auto &name : vocabulary.objects) {
    auto v = table.at(name);
    objects_.emplace_back(v.begin(), v.end());
  }
  for (const auto &name : vocabulary.predicates) {
    auto v = table.at(name);
    predicates_.emplace_back(v.begin(), v.end());
  }
  const int n = num_objects();
  const int k = num_predicates();
  object_dist_.resize(static_cast<std::size_t>(n) * n);
  predicate_dist_.resize(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) object_dist_[a * n + b] = cosine_distance(objects_[a], objects_[b]);
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      predicate_dist_[a * k + b] = cosine_distance(predicates_[a], predicates_[b]);
    }
  }
}

}  // namespace relkit
