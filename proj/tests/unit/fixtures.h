#ifndef RELKIT_TESTS_FIXTURES_H_
#define RELKIT_TESTS_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>

#include "relkit/corpus.h"
#include "relkit/embeddings.h"
#include "relkit/error.h"
#include "relkit/model.h"

namespace relkit::test {

// Kind of the relkit::Error thrown by fn, or nullopt when it returns.
inline std::optional<ErrorKind> error_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  return std::nullopt;
}

inline CategoryVocabulary vocabulary(int n, int k) {
  CategoryVocabulary v;
  for (int i = 0; i < n; ++i) v.objects.push_back("obj" + std::to_string(i));
  for (int p = 0; p < k; ++p) v.predicates.push_back("pred" + std::to_string(p));
  return v;
}

inline EmbeddingTable random_table(const CategoryVocabulary &v, std::size_t dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  EmbeddingTable table(dim);
  auto add = [&](const std::string &name) {
    Vec x(dim);
    for (double &c : x) c = g(rng);
    table.add(name, x);
  };
  for (const auto &o : v.objects) add(o);
  for (const auto &p : v.predicates) add(p);
  return table;
}

inline ModelParams random_params(int K, int D, int dim, std::mt19937_64 &rng,
                                 Activation a = Activation::kSoftmax) {
  std::normal_distribution<double> g(0.0, 1.0);
  ModelParams p(K, D, dim, a);
  for (double &v : p.values()) v = g(rng);
  return p;
}

inline Box random_box(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_real_distribution<double> s(10.0, 60.0);
  const double x = u(rng), y = u(rng);
  return {x, y, x + s(rng), y + s(rng)};
}

inline Vec random_vec(std::size_t n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec x(n);
  for (double &c : x) c = g(rng);
  return x;
}

// An image with `dets` random detections, a feature for every ordered pair,
// and `gts` relationships between detections (boxes jittered or not), each
// with a feature. Some GTs share a box pair.
inline ImageRecord random_image(const std::string &id, int N, int K, int D, int dets, int gts,
                                std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageRecord image;
  image.image_id = id;
  for (int d = 0; d < dets; ++d) {
    Detection det{random_box(rng), Vec(N)};
    for (double &c : det.class_scores) c = u(rng);
    image.detections.push_back(det);
  }
  for (int a = 0; a < dets; ++a) {
    for (int b = 0; b < dets; ++b) {
      if (a != b) image.pair_features.push_back({a, b, random_vec(D, rng)});
    }
  }
  std::uniform_int_distribution<int> pick_det(0, std::max(0, dets - 1));
  std::uniform_int_distribution<int> pick_obj(0, N - 1);
  std::uniform_int_distribution<int> pick_pred(0, K - 1);
  for (int g = 0; g < gts; ++g) {
    GroundTruthRel gt;
    if (g > 0 && u(rng) < 0.3) {
      gt = image.ground_truth.back();
      gt.k = pick_pred(rng);
    } else {
      const int a = pick_det(rng);
      int b = pick_det(rng);
      if (dets > 1) {
        while (b == a) b = pick_det(rng);
      }
      gt.subject_box = dets > 0 ? image.detections[a].box : random_box(rng);
      gt.object_box = dets > 1 ? image.detections[b].box : random_box(rng);
      if (u(rng) < 0.3) gt.object_box.x2 += 4.0;
      gt.i = pick_obj(rng);
      gt.j = pick_obj(rng);
      gt.k = pick_pred(rng);
    }
    image.ground_truth.push_back(gt);
    image.gt_pair_features.push_back({g, random_vec(D, rng)});
  }
  return image;
}

inline Corpus random_corpus(int images, int N, int K, int D, std::mt19937_64 &rng, int max_dets = 4) {
  Corpus c;
  c.vocabulary = vocabulary(N, K);
  c.feature_dim = D;
  std::uniform_int_distribution<int> dets(1, max_dets);
  std::uniform_int_distribution<int> gts(1, 3);
  for (int m = 0; m < images; ++m) {
    c.images.push_back(random_image("img" + std::to_string(m), N, K, D, dets(rng), gts(rng), rng));
  }
  return c;
}

class TempDir {
 public:
  explicit TempDir(const std::string &name)
      : path_(std::filesystem::temp_directory_path() / ("relkit_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

}  // namespace relkit::test

#endif  // RELKIT_TESTS_FIXTURES_H_
