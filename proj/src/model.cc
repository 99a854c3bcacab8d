#include "relkit/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "relkit/error.h"

namespace relkit {

using ojson = nlohmann::ordered_json;

std::string_view activation_name(Activation a) {
  return a == Activation::kSoftmax ? "softmax" : "raw-linear";
}

Activation parse_activation(std::string_view name) {
  if (name == "softmax") return Activation::kSoftmax;
  if (name == "raw-linear" || name == "raw") return Activation::kRawLinear;
  throw Error(ErrorKind::kInvalidArgument, "unknown activation '" + std::string(name) + "'");
}

std::string_view score_mode_name(ScoreMode m) {
  switch (m) {
    case ScoreMode::kJoint: return "joint";
    case ScoreMode::kVisualOnly: return "visual";
    case ScoreMode::kLanguageOnly: return "language";
  }
  return "joint";
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "joint") return ScoreMode::kJoint;
  if (name == "visual") return ScoreMode::kVisualOnly;
  if (name == "language") return ScoreMode::kLanguageOnly;
  throw Error(ErrorKind::kInvalidArgument, "unknown score mode '" + std::string(name) + "'");
}

ModelParams::ModelParams(int num_predicates, int feature_dim, int embedding_dim,
                         Activation activation)
    : K_(num_predicates), D_(feature_dim), dim_(embedding_dim), activation_(activation) {
  if (K_ < 1 || D_ < 1 || dim_ < 1) {
    throw Error(ErrorKind::kInvalidArgument, "model dimensions must be positive");
  }
  values_.assign(b_offset() + K_, 0.0);
}

std::string ModelParams::coordinate_name(std::size_t n) const {
  auto idx = [](const char *name, std::size_t row, std::size_t col) {
    return std::string(name) + "[" + std::to_string(row) + "][" + std::to_string(col) + "]";
  };
  if (n < s_offset()) return idx("z", n / D_, n % D_);
  if (n < w_offset()) return "s[" + std::to_string(n - s_offset()) + "]";
  if (n < b_offset()) {
    const std::size_t m = n - w_offset();
    return idx("w", m / language_dim(), m % language_dim());
  }
  return "b[" + std::to_string(n - b_offset()) + "]";
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out = *this;
  std::fill(out.values_.begin(), out.values_.end(), 0.0);
  return out;
}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Vec predicate_activation(const ModelParams &params, std::span<const double> feature) {
  if (static_cast<int>(feature.size()) != params.feature_dim()) {
    throw Error(ErrorKind::kDimMismatch, "feature length " + std::to_string(feature.size()) +
                                             ", model expects " +
                                             std::to_string(params.feature_dim()));
  }
  const int K = params.num_predicates();
  Vec a(K);
  for (int k = 0; k < K; ++k) a[k] = dot(params.z(k), feature) + params.s(k);
  if (params.activation() == Activation::kSoftmax) {
    const double peak = *std::max_element(a.begin(), a.end());
    double total = 0.0;
    for (double &v : a) total += (v = std::exp(v - peak));
    for (double &v : a) v /= total;
  }
  return a;
}

double visual_score(const ModelParams &params, const Triple &t, double p_i, double p_j,
                    std::span<const double> feature) {
  return p_i * predicate_activation(params, feature)[t.k] * p_j;
}

double project_f(const ModelParams &params, const VocabEmbeddings &emb, const Triple &t) {
  const auto w = params.w(t.k);
  const std::size_t dim = emb.dim();
  return dot(w.first(dim), emb.object(t.i)) + dot(w.subspan(dim), emb.object(t.j)) +
         params.b(t.k);
}

LanguageProjection::LanguageProjection(const ModelParams &params, const VocabEmbeddings &emb)
    : N_(emb.num_objects()) {
  if (static_cast<int>(emb.dim()) != params.embedding_dim()) {
    throw Error(ErrorKind::kDimMismatch, "embedding dim " + std::to_string(emb.dim()) +
                                             ", model expects " +
                                             std::to_string(params.embedding_dim()));
  }
  const int K = params.num_predicates();
  const std::size_t dim = emb.dim();
  left_.resize(static_cast<std::size_t>(K) * N_);
  right_.resize(left_.size());
  bias_.resize(K);
  for (int k = 0; k < K; ++k) {
    const auto w = params.w(k);
    bias_[k] = params.b(k);
    for (int i = 0; i < N_; ++i) {
      left_[k * N_ + i] = dot(w.first(dim), emb.object(i));
      right_[k * N_ + i] = dot(w.subspan(dim), emb.object(i));
    }
  }
}

bool ranks_before(const Prediction &a, const Prediction &b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.triple.k, a.triple.i, a.triple.j, a.o1, a.o2) <
         std::tie(b.triple.k, b.triple.i, b.triple.j, b.o1, b.o2);
}

std::vector<int> top_labels(std::span<const double> class_scores, int c) {
  std::vector<int> order(class_scores.size());
  std::iota(order.begin(), order.end(), 0);
  const auto take = std::min<std::size_t>(std::max(c, 0), order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(), [&](int a, int b) {
    return class_scores[a] != class_scores[b] ? class_scores[a] > class_scores[b] : a < b;
  });
  order.resize(take);
  return order;
}

std::vector<Prediction> predict_image(const ModelParams &params, const VocabEmbeddings &emb,
                                      const ImageRecord &image, const PredictOptions &options) {
  std::vector<Prediction> out;
  if (image.pair_features.empty()) return out;

  const LanguageProjection language(params, emb);
  const int K = params.num_predicates();
  std::vector<std::vector<int>> labels(image.detections.size());
  for (std::size_t d = 0; d < image.detections.size(); ++d) {
    labels[d] = top_labels(image.detections[d].class_scores, options.labels_per_box);
  }

  std::vector<Prediction> pair_candidates;
  for (const auto &pf : image.pair_features) {
    const auto &det1 = image.detections[pf.o1];
    const auto &det2 = image.detections[pf.o2];
    const Vec activation = predicate_activation(params, pf.feature);
    pair_candidates.clear();
    for (int i : labels[pf.o1]) {
      for (int j : labels[pf.o2]) {
        const double p = det1.class_scores[i] * det2.class_scores[j];
        for (int k = 0; k < K; ++k) {
          Prediction pred;
          pred.triple = {i, k, j};
          pred.o1 = pf.o1;
          pred.o2 = pf.o2;
          pred.box1 = det1.box;
          pred.box2 = det2.box;
          pred.visual = p * activation[k];
          pred.language = language(pred.triple);
          switch (options.score_mode) {
            case ScoreMode::kJoint: pred.score = pred.visual * pred.language; break;
            case ScoreMode::kVisualOnly: pred.score = pred.visual; break;
            case ScoreMode::kLanguageOnly: pred.score = pred.language; break;
          }
          pair_candidates.push_back(pred);
        }
      }
    }
    if (options.max_per_pair > 0 &&
        pair_candidates.size() > static_cast<std::size_t>(options.max_per_pair)) {
      std::partial_sort(pair_candidates.begin(), pair_candidates.begin() + options.max_per_pair,
                        pair_candidates.end(), ranks_before);
      pair_candidates.resize(options.max_per_pair);
    }
    out.insert(out.end(), pair_candidates.begin(), pair_candidates.end());
  }

  if (options.top_n > 0 && out.size() > static_cast<std::size_t>(options.top_n)) {
    std::partial_sort(out.begin(), out.begin() + options.top_n, out.end(), ranks_before);
    out.resize(options.top_n);
  } else {
    std::sort(out.begin(), out.end(), ranks_before);
  }
  return out;
}

std::string model_to_json(const ModelParams &params) {
  const int K = params.num_predicates();
  ojson j;
  j["format"] = kModelFormat;
  j["D"] = params.feature_dim();
  j["dim"] = params.embedding_dim();
  j["K"] = K;
  j["activation"] = activation_name(params.activation());
  j["z"] = ojson::array();
  j["w"] = ojson::array();
  Vec s(K), b(K);
  for (int k = 0; k < K; ++k) {
    j["z"].push_back(Vec(params.z(k).begin(), params.z(k).end()));
    s[k] = params.s(k);
  }
  j["s"] = s;
  for (int k = 0; k < K; ++k) {
    j["w"].push_back(Vec(params.w(k).begin(), params.w(k).end()));
    b[k] = params.b(k);
  }
  j["b"] = b;
  return j.dump();
}

ModelParams model_from_json(std::string_view text) {
  try {
    const ojson j = ojson::parse(text);
    if (j.value("format", "") != kModelFormat) {
      throw Error(ErrorKind::kParseError, std::string("not a ") + kModelFormat + " document");
    }
    const int K = j.at("K").get<int>();
    ModelParams params(K, j.at("D").get<int>(), j.at("dim").get<int>(),
                       parse_activation(j.at("activation").get<std::string>()));
    const auto z = j.at("z").get<std::vector<Vec>>();
    const auto w = j.at("w").get<std::vector<Vec>>();
    const auto s = j.at("s").get<Vec>();
    const auto b = j.at("b").get<Vec>();
    if (static_cast<int>(z.size()) != K || static_cast<int>(w.size()) != K ||
        static_cast<int>(s.size()) != K || static_cast<int>(b.size()) != K) {
      throw Error(ErrorKind::kParseError, "parameter blocks must have K rows");
    }
    for (int k = 0; k < K; ++k) {
      if (z[k].size() != params.z(k).size() || w[k].size() != params.w(k).size()) {
        throw Error(ErrorKind::kDimMismatch, "row " + std::to_string(k));
      }
      std::copy(z[k].begin(), z[k].end(), params.z(k).begin());
      std::copy(w[k].begin(), w[k].end(), params.w(k).begin());
      params.s(k) = s[k];
      params.b(k) = b[k];
    }
    if (!params.all_finite()) throw Error(ErrorKind::kParseError, "non-finite parameter");
    return params;
  } catch (const Error &) {
    throw;
  } catch (const std::exception &e) {
    throw Error(ErrorKind::kParseError, e.what());
  }
}

void save_model(const std::filesystem::path &path, const ModelParams &params) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << model_to_json(params) << '\n';
}

ModelParams load_model(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace relkit
