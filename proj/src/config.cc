#include "relkit/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "relkit/error.h"

namespace relkit {

std::string_view likelihood_name(GtLikelihood g) {
  return g == GtLikelihood::kOne ? "one" : "detector";
}

GtLikelihood parse_likelihood(std::string_view name) {
  if (name == "detector") return GtLikelihood::kDetector;
  if (name == "one") return GtLikelihood::kOne;
  throw Error(ErrorKind::kInvalidArgument, "unknown gt likelihood '" + std::string(name) + "'");
}

std::string_view direction_name(DescentDirection d) {
  return d == DescentDirection::kSubgradient ? "subgradient" : "quasi-newton";
}

DescentDirection parse_direction(std::string_view name) {
  if (name == "subgradient") return DescentDirection::kSubgradient;
  if (name == "quasi-newton") return DescentDirection::kQuasiNewton;
  throw Error(ErrorKind::kInvalidArgument, "unknown descent direction '" + std::string(name) + "'");
}

namespace {

// Reads typed fields out of an object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const Json &j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto &[key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(key, "unknown key");
    }
  }

  template <typename T>
  void get(const char *key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const Json &v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.get<long long>() < 0) fail(key, "expected a non-negative integer");
      }
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      if (!v.is_array()) fail(key, "expected an array of integers");
      out.clear();
      for (const auto &e : v) {
        if (!e.is_number_integer()) fail(key, "expected an array of integers");
        out.push_back(e.get<int>());
      }
    } else {
      if (!v.is_string()) fail(key, "expected a string");
      out = v.get<std::string>();
    }
  }

  template <typename E, typename Parse>
  void get_enum(const char *key, E &out, Parse parse) {
    std::string name;
    seen_.insert(key);
    if (!j_.contains(key)) return;
    get(key, name);
    out = parse(name);
  }

 private:
  [[noreturn]] void fail(const std::string &key, const std::string &what) const {
    std::string where = section_;
    if (!key.empty()) where += where.empty() ? key : "." + key;
    throw Error(ErrorKind::kInvalidArgument, where + ": " + what);
  }

  const Json &j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace

Json to_json(const SynthConfig &c) {
  Json j;
  j["num_objects"] = c.num_objects;
  j["num_predicates"] = c.num_predicates;
  j["feature_dim"] = c.feature_dim;
  j["embedding_dim"] = c.embedding_dim;
  j["train_images"] = c.train_images;
  j["test_images"] = c.test_images;
  j["validation_fraction"] = c.validation_fraction;
  j["relations_per_image"] = c.relations_per_image;
  j["distractors_per_image"] = c.distractors_per_image;
  j["share_object_prob"] = c.share_object_prob;
  j["triple_types"] = c.triple_types;
  j["zipf_exponent"] = c.zipf_exponent;
  j["clusters"] = c.clusters;
  j["predicate_groups"] = c.predicate_groups;
  j["embedding_noise"] = c.embedding_noise;
  j["predicate_specificity"] = c.predicate_specificity;
  j["prototype_spread"] = c.prototype_spread;
  j["feature_noise"] = c.feature_noise;
  j["detection_noise"] = c.detection_noise;
  j["label_confusion"] = c.label_confusion;
  j["box_jitter"] = c.box_jitter;
  j["hold_out"] = c.hold_out;
  return j;
}

SynthConfig synth_config_from_json(const Json &j) {
  SynthConfig c;
  Reader r(j, "synth");
  r.get("num_objects", c.num_objects);
  r.get("num_predicates", c.num_predicates);
  r.get("feature_dim", c.feature_dim);
  r.get("embedding_dim", c.embedding_dim);
  r.get("train_images", c.train_images);
  r.get("test_images", c.test_images);
  r.get("validation_fraction", c.validation_fraction);
  r.get("relations_per_image", c.relations_per_image);
  r.get("distractors_per_image", c.distractors_per_image);
  r.get("share_object_prob", c.share_object_prob);
  r.get("triple_types", c.triple_types);
  r.get("zipf_exponent", c.zipf_exponent);
  r.get("clusters", c.clusters);
  r.get("predicate_groups", c.predicate_groups);
  r.get("embedding_noise", c.embedding_noise);
  r.get("predicate_specificity", c.predicate_specificity);
  r.get("prototype_spread", c.prototype_spread);
  r.get("feature_noise", c.feature_noise);
  r.get("detection_noise", c.detection_noise);
  r.get("label_confusion", c.label_confusion);
  r.get("box_jitter", c.box_jitter);
  r.get("hold_out", c.hold_out);
  return c;
}

Json to_json(const TrainingConfig &c) {
  Json j;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["variance_sample_count"] = c.variance_sample_count;
  j["frequency_pair_count"] = c.frequency_pair_count;
  j["lr_visual"] = c.lr_visual;
  j["lr_language"] = c.lr_language;
  j["max_iterations"] = c.max_iterations;
  j["inner_steps"] = c.inner_steps;
  j["step_halving"] = c.step_halving;
  j["min_step"] = c.min_step;
  j["direction"] = direction_name(c.direction);
  j["memory"] = c.memory;
  j["tolerance"] = c.tolerance;
  j["resample_each_iteration"] = c.resample_each_iteration;
  j["gt_likelihood"] = likelihood_name(c.gt_likelihood);
  j["variant"] = variant_name(c.variant);
  j["activation"] = activation_name(c.activation);
  j["init_scale"] = c.init_scale;
  j["init_bias"] = c.init_bias;
  return j;
}

TrainingConfig training_config_from_json(const Json &j) {
  TrainingConfig c;
  Reader r(j, "training");
  r.get("lambda1", c.lambda1);
  r.get("lambda2", c.lambda2);
  r.get("variance_sample_count", c.variance_sample_count);
  r.get("frequency_pair_count", c.frequency_pair_count);
  r.get("lr_visual", c.lr_visual);
  r.get("lr_language", c.lr_language);
  r.get("max_iterations", c.max_iterations);
  r.get("inner_steps", c.inner_steps);
  r.get("step_halving", c.step_halving);
  r.get("min_step", c.min_step);
  r.get_enum("direction", c.direction, parse_direction);
  r.get("memory", c.memory);
  r.get("tolerance", c.tolerance);
  r.get("resample_each_iteration", c.resample_each_iteration);
  r.get_enum("gt_likelihood", c.gt_likelihood, parse_likelihood);
  r.get_enum("variant", c.variant, parse_variant);
  r.get_enum("activation", c.activation, parse_activation);
  r.get("init_scale", c.init_scale);
  r.get("init_bias", c.init_bias);
  return c;
}

Json to_json(const EvalOptions &c) {
  Json j;
  j["k_list"] = c.k_list;
  j["iou_threshold"] = c.iou_threshold;
  j["labels_per_box"] = c.labels_per_box;
  j["max_per_pair"] = c.max_per_pair;
  j["score_mode"] = score_mode_name(c.score_mode);
  return j;
}

EvalOptions eval_options_from_json(const Json &j) {
  EvalOptions c;
  Reader r(j, "eval");
  r.get("k_list", c.k_list);
  r.get("iou_threshold", c.iou_threshold);
  r.get("labels_per_box", c.labels_per_box);
  r.get("max_per_pair", c.max_per_pair);
  r.get_enum("score_mode", c.score_mode, parse_score_mode);
  return c;
}

Json to_json(const DescriptorOptions &c) {
  Json j;
  j["n"] = c.n;
  j["labels_per_box"] = c.labels_per_box;
  j["score_mode"] = score_mode_name(c.score_mode);
  return j;
}

DescriptorOptions descriptor_options_from_json(const Json &j) {
  DescriptorOptions c;
  Reader r(j, "descriptor");
  r.get("n", c.n);
  r.get("labels_per_box", c.labels_per_box);
  r.get_enum("score_mode", c.score_mode, parse_score_mode);
  return c;
}

Json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorKind::kParseError, path + ": " + e.what());
  }
}

void write_text_file(const std::string &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

}  // namespace relkit
