#include "relkit/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "relkit/error.h"
#include "relkit/rng.h"

namespace relkit {

void SynthConfig::validate() const {
  auto require = [](bool ok, const std::string &what) {
    if (!ok) throw Error(ErrorKind::kInfeasibleConfig, what);
  };
  require(num_objects >= 2, "num_objects must be >= 2");
  require(num_predicates >= 1, "num_predicates must be >= 1");
  require(feature_dim >= 1 && embedding_dim >= 1, "dimensions must be >= 1");
  require(train_images >= 1 && test_images >= 1, "each split needs at least one image");
  require(validation_fraction >= 0.0, "validation_fraction must be >= 0");
  require(relations_per_image >= 1, "relations_per_image must be >= 1");
  require(distractors_per_image >= 0, "distractors_per_image must be >= 0");
  require(clusters >= 1 && clusters <= num_objects, "clusters must lie in [1, num_objects]");
  require(predicate_groups >= 1 && predicate_groups <= num_predicates,
          "predicate_groups must lie in [1, num_predicates]");
  require(zipf_exponent >= 0.0, "zipf_exponent must be >= 0");
  const long long space = static_cast<long long>(num_objects) * num_objects * num_predicates;
  require(triple_types >= 1 && triple_types <= space, "triple_types must lie in [1, N*N*K]");
  require(hold_out >= 0, "hold_out must be >= 0");
  require(hold_out < triple_types,
          "hold_out (" + std::to_string(hold_out) + ") must be smaller than triple_types (" +
              std::to_string(triple_types) + ")");
  require(hold_out <= test_images * relations_per_image, "test split too small for hold_out");
}

namespace {

constexpr double kImageWidth = 640.0;
constexpr double kImageHeight = 480.0;

Vec gaussian(Rng &rng, int n, double scale) {
  Vec v(n);
  for (double &x : v) x = scale * rng.normal();
  return v;
}

std::string padded(const char *prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, n);
  return buf;
}

class World {
 public:
  World(const SynthConfig &config, Rng &rng) : cfg_(config), rng_(rng) {}

  void build_vocabulary_and_embeddings(CategoryVocabulary &vocab, EmbeddingTable &table) {
    const int dim = cfg_.embedding_dim;
    for (int n = 0; n < cfg_.num_objects; ++n) vocab.objects.push_back(padded("object_", n));
    for (int n = 0; n < cfg_.num_predicates; ++n) vocab.predicates.push_back(padded("predicate_", n));

    std::vector<Vec> centres;
    for (int c = 0; c < cfg_.clusters; ++c) {
      Vec v = gaussian(rng_, dim, 1.0);
      const double norm = std::sqrt(dot(v, v));
      for (double &x : v) x /= norm;
      centres.push_back(v);
    }
    table = EmbeddingTable(dim);
    cluster_.resize(cfg_.num_objects);
    for (int o = 0; o < cfg_.num_objects; ++o) {
      cluster_[o] = o % cfg_.clusters;
      Vec v = centres[cluster_[o]];
      axpy(1.0, gaussian(rng_, dim, cfg_.embedding_noise / std::sqrt(dim)), v);
      objects_.push_back(v);
      table.add(vocab.objects[o], v);
    }
  }

  // Predicate embeddings follow the predicate-specific part of W*, so that
  // predicates with similar plausibility patterns lie close together.
  void add_predicate_embeddings(const CategoryVocabulary &vocab, EmbeddingTable &table) {
    const int dim = cfg_.embedding_dim;
    std::vector<Vec> projection;
    for (int r = 0; r < dim; ++r) projection.push_back(gaussian(rng_, 2 * dim, 1.0 / std::sqrt(2 * dim)));
    for (int k = 0; k < cfg_.num_predicates; ++k) {
      Vec v(dim);
      for (int r = 0; r < dim; ++r) v[r] = dot(projection[r], specific_[k]);
      const double norm = std::sqrt(dot(v, v));
      for (double &x : v) x /= norm;
      axpy(1.0, gaussian(rng_, dim, cfg_.embedding_noise / std::sqrt(dim)), v);
      table.add(vocab.predicates[k], v);
    }
  }

  void build_truth(ModelParams &truth) {
    const int D = cfg_.feature_dim;
    const int dim = cfg_.embedding_dim;
    truth = ModelParams(cfg_.num_predicates, D, dim, Activation::kSoftmax);
    std::vector<Vec> group_centres;
    for (int g = 0; g < cfg_.predicate_groups; ++g) group_centres.push_back(gaussian(rng_, D, 1.0));
    for (int k = 0; k < cfg_.num_predicates; ++k) {
      Vec proto = group_centres[k % cfg_.predicate_groups];
      axpy(1.0, gaussian(rng_, D, cfg_.prototype_spread), proto);
      std::copy(proto.begin(), proto.end(), truth.z(k).begin());
      prototypes_.push_back(std::move(proto));
    }
    const Vec shared = gaussian(rng_, 2 * dim, 1.0);
    for (int k = 0; k < cfg_.num_predicates; ++k) {
      specific_.push_back(gaussian(rng_, 2 * dim, 1.0));
      Vec w = shared;
      axpy(cfg_.predicate_specificity, specific_.back(), w);
      std::copy(w.begin(), w.end(), truth.w(k).begin());
    }
  }

  // Plausibility order of all triples under W*; the top ones form the support.
  std::vector<Triple> support(const ModelParams &truth) const {
    std::vector<std::pair<double, Triple>> scored;
    for (int i = 0; i < cfg_.num_objects; ++i) {
      for (int k = 0; k < cfg_.num_predicates; ++k) {
        for (int j = 0; j < cfg_.num_objects; ++j) {
          const auto w = truth.w(k);
          const double f = dot(w.first(cfg_.embedding_dim), objects_[i]) +
                           dot(w.subspan(cfg_.embedding_dim), objects_[j]) + truth.b(k);
          scored.push_back({-f, {i, k, j}});
        }
      }
    }
    std::sort(scored.begin(), scored.end());
    std::vector<Triple> out;
    for (int r = 0; r < cfg_.triple_types; ++r) out.push_back(scored[r].second);
    return out;
  }

  Box random_box() {
    const double w = rng_.uniform(40.0, 200.0);
    const double h = rng_.uniform(40.0, 200.0);
    const double x = rng_.uniform(0.0, kImageWidth - w);
    const double y = rng_.uniform(0.0, kImageHeight - h);
    return {x, y, x + w, y + h};
  }

  Box jitter(const Box &b) {
    const double sx = cfg_.box_jitter * b.width();
    const double sy = cfg_.box_jitter * b.height();
    Box out{b.x1 + sx * rng_.normal(), b.y1 + sy * rng_.normal(), b.x2 + sx * rng_.normal(),
            b.y2 + sy * rng_.normal()};
    if (!out.valid()) return b;
    return out;
  }

  Vec class_scores(int label) {
    Vec s(cfg_.num_objects);
    for (double &x : s) x = rng_.uniform(0.0, cfg_.detection_noise);
    int peak = label;
    if (rng_.uniform() < cfg_.label_confusion) {
      std::vector<int> mates;
      for (int o = 0; o < cfg_.num_objects; ++o) {
        if (o != label && cluster_[o] == cluster_[label]) mates.push_back(o);
      }
      if (!mates.empty()) {
        peak = mates[rng_.below(mates.size())];
        s[label] = rng_.uniform(0.5, 0.9);
      }
    }
    s[peak] = 1.0;
    const double top = *std::max_element(s.begin(), s.end());
    for (double &x : s) x /= top;
    return s;
  }

  Vec predicate_feature(int k) {
    Vec f = prototypes_[k];
    axpy(1.0, gaussian(rng_, cfg_.feature_dim, cfg_.feature_noise), f);
    return f;
  }

  Vec background_feature() { return gaussian(rng_, cfg_.feature_dim, cfg_.feature_noise); }

  ImageRecord render(const std::string &id, const std::vector<Triple> &relations) {
    struct Object {
      Box box;
      int label;
    };
    std::vector<Object> objects;
    auto place = [&](int label, int avoid) {
      if (rng_.uniform() < cfg_.share_object_prob) {
        for (int o = 0; o < static_cast<int>(objects.size()); ++o) {
          if (objects[o].label == label && o != avoid) return o;
        }
      }
      objects.push_back({random_box(), label});
      return static_cast<int>(objects.size()) - 1;
    };

    ImageRecord image;
    image.image_id = id;
    std::vector<std::pair<int, int>> rel_objects;
    for (const Triple &t : relations) {
      const int s = place(t.i, -1);
      const int o = place(t.j, s);
      rel_objects.push_back({s, o});
    }
    for (int d = 0; d < cfg_.distractors_per_image; ++d) {
      objects.push_back({random_box(), rng_.index(cfg_.num_objects)});
    }

    for (const auto &obj : objects) image.detections.push_back({jitter(obj.box), class_scores(obj.label)});
    for (std::size_t r = 0; r < relations.size(); ++r) {
      const auto [s, o] = rel_objects[r];
      image.ground_truth.push_back({objects[s].box, relations[r].i, relations[r].k,
                                    relations[r].j, objects[o].box});
      image.gt_pair_features.push_back({static_cast<int>(r), predicate_feature(relations[r].k)});
    }
    const int n = static_cast<int>(objects.size());
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b) continue;
        int predicate = -1;
        for (std::size_t r = 0; r < relations.size() && predicate < 0; ++r) {
          if (rel_objects[r] == std::pair{a, b}) predicate = relations[r].k;
        }
        image.pair_features.push_back(
            {a, b, predicate >= 0 ? predicate_feature(predicate) : background_feature()});
      }
    }
    return image;
  }

 private:
  const SynthConfig &cfg_;
  Rng &rng_;
  std::vector<int> cluster_;
  std::vector<Vec> objects_;
  std::vector<Vec> prototypes_;
  std::vector<Vec> specific_;
};

// Draws an index from a discrete distribution given its cumulative weights.
int draw(Rng &rng, const Vec &cumulative) {
  const double u = rng.uniform() * cumulative.back();
  return static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                          cumulative.begin());
}

}  // namespace

SyntheticData generate_synthetic(const SynthConfig &config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  World world(config, rng);
  SyntheticData data;

  CategoryVocabulary vocab;
  world.build_vocabulary_and_embeddings(vocab, data.embeddings);
  world.build_truth(data.truth);
  world.add_predicate_embeddings(vocab, data.embeddings);
  data.support = world.support(data.truth);

  // Held-out types: drawn from ranks 2..T so that the head stays observed.
  std::vector<int> ranks(config.triple_types - 1);
  std::iota(ranks.begin(), ranks.end(), 1);
  rng.shuffle(ranks.begin(), ranks.end());
  std::set<int> held(ranks.begin(), ranks.begin() + config.hold_out);
  for (int r : held) data.held_out.push_back(data.support[r]);

  Vec zipf_all, zipf_train;
  double acc_all = 0.0, acc_train = 0.0;
  for (int r = 0; r < config.triple_types; ++r) {
    const double p = std::pow(static_cast<double>(r + 1), -config.zipf_exponent);
    acc_all += p;
    acc_train += held.contains(r) ? 0.0 : p;
    zipf_all.push_back(acc_all);
    zipf_train.push_back(acc_train);
  }

  auto draw_split = [&](int images, const Vec &cumulative) {
    std::vector<std::vector<int>> out(images);
    for (auto &rels : out) {
      for (int r = 0; r < config.relations_per_image; ++r) rels.push_back(draw(rng, cumulative));
    }
    return out;
  };
  const int validation_images =
      static_cast<int>(std::lround(config.validation_fraction * config.train_images));
  auto train_rels = draw_split(config.train_images, zipf_train);
  auto validation_rels = draw_split(validation_images, zipf_train);
  auto test_rels = draw_split(config.test_images, zipf_all);

  // Test relations must be observed in train unless held out, and every
  // held-out type must occur in test.
  std::set<int> observed;
  for (const auto &rels : train_rels) observed.insert(rels.begin(), rels.end());
  Vec zipf_allowed;
  double acc_allowed = 0.0;
  for (int r = 0; r < config.triple_types; ++r) {
    if (observed.contains(r) || held.contains(r)) {
      acc_allowed += std::pow(static_cast<double>(r + 1), -config.zipf_exponent);
    }
    zipf_allowed.push_back(acc_allowed);
  }
  for (auto &rels : test_rels) {
    for (int &r : rels) {
      if (!observed.contains(r) && !held.contains(r)) r = draw(rng, zipf_allowed);
    }
  }
  for (auto &rels : validation_rels) {
    for (int &r : rels) {
      if (!observed.contains(r)) r = draw(rng, zipf_allowed);
      while (held.contains(r)) r = draw(rng, zipf_train);
    }
  }
  std::set<int> in_test;
  for (const auto &rels : test_rels) in_test.insert(rels.begin(), rels.end());
  int slot = 0;
  for (int r : held) {
    if (in_test.contains(r)) continue;
    // Overwrite non-first relations so the dominant triples stay untouched.
    const int per = config.relations_per_image;
    while (true) {
      const int image = slot / per;
      const int rel = slot % per;
      ++slot;
      if (image >= config.test_images) throw Error(ErrorKind::kInfeasibleConfig, "cannot place held-out triples");
      if (per > 1 && rel == 0) continue;
      if (held.contains(test_rels[image][rel])) continue;
      test_rels[image][rel] = r;
      break;
    }
  }

  auto render_split = [&](const std::vector<std::vector<int>> &rels, const std::string &split) {
    Corpus c;
    c.vocabulary = vocab;
    c.feature_dim = config.feature_dim;
    c.split = split;
    for (std::size_t m = 0; m < rels.size(); ++m) {
      std::vector<Triple> triples;
      for (int r : rels[m]) triples.push_back(data.support[r]);
      char id[48];
      std::snprintf(id, sizeof(id), "%s_%05zu", split.c_str(), m);
      c.images.push_back(world.render(id, triples));
    }
    return c;
  };
  data.train = render_split(train_rels, "train");
  data.validation = render_split(validation_rels, "validation");
  data.test = render_split(test_rels, "test");
  return data;
}

}  // namespace relkit
