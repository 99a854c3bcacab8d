#include "relkit/corpus.h"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "relkit/error.h"

namespace relkit {

using ojson = nlohmann::ordered_json;

std::string to_string(const Triple &t) {
  return "<" + std::to_string(t.i) + "," + std::to_string(t.k) + "," +
         std::to_string(t.j) + ">";
}

void CategoryVocabulary::validate() const {
  if (objects.empty()) throw Error(ErrorKind::kInvalidArgument, "vocabulary has no objects");
  if (predicates.empty()) throw Error(ErrorKind::kInvalidArgument, "vocabulary has no predicates");
  for (const auto *list : {&objects, &predicates}) {
    std::unordered_set<std::string> seen;
    for (const auto &name : *list) {
      if (!seen.insert(name).second) {
        throw Error(ErrorKind::kInvalidArgument, "duplicate vocabulary name '" + name + "'");
      }
    }
  }
}

const Vec *ImageRecord::gt_feature(int gt) const {
  for (const auto &f : gt_pair_features) {
    if (f.gt == gt) return &f.feature;
  }
  return nullptr;
}

std::size_t Corpus::gt_count() const {
  std::size_t total = 0;
  for (const auto &image : images) total += image.ground_truth.size();
  return total;
}

const ImageRecord *Corpus::find(const std::string &image_id) const {
  for (const auto &image : images) {
    if (image.image_id == image_id) return &image;
  }
  return nullptr;
}

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

void check_box(const Box &box, std::size_t line) {
  if (!box.valid() || !std::isfinite(box.x1) || !std::isfinite(box.y1) ||
      !std::isfinite(box.x2) || !std::isfinite(box.y2)) {
    throw Error(ErrorKind::kParseError, at_line(line) + ": invalid box");
  }
}

void check_feature(const Vec &f, int dim, std::size_t line) {
  if (static_cast<int>(f.size()) != dim) {
    throw Error(ErrorKind::kFeatureDimMismatch,
                at_line(line) + ": expected " + std::to_string(dim) + " got " +
                    std::to_string(f.size()));
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kParseError, at_line(line) + ": non-finite feature");
  }
}

void check_index(int index, int bound, const char *what, std::size_t line) {
  if (index < 0 || index >= bound) {
    throw Error(ErrorKind::kIndexOutOfRange, at_line(line) + ": " + what + " " +
                                                 std::to_string(index) + " of " +
                                                 std::to_string(bound));
  }
}

void validate_image(const ImageRecord &image, const Corpus &corpus, std::size_t line) {
  const int n_objects = corpus.vocabulary.num_objects();
  const int n_predicates = corpus.vocabulary.num_predicates();
  const int n_det = static_cast<int>(image.detections.size());
  for (const auto &det : image.detections) {
    check_box(det.box, line);
    if (static_cast<int>(det.class_scores.size()) != n_objects) {
      throw Error(ErrorKind::kParseError, at_line(line) + ": class_scores length " +
                                              std::to_string(det.class_scores.size()));
    }
    for (double p : det.class_scores) {
      if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw Error(ErrorKind::kParseError, at_line(line) + ": class score outside [0,1]");
      }
    }
  }
  for (const auto &pf : image.pair_features) {
    check_index(pf.o1, n_det, "detection", line);
    check_index(pf.o2, n_det, "detection", line);
    if (pf.o1 == pf.o2) throw Error(ErrorKind::kParseError, at_line(line) + ": self pair");
    check_feature(pf.feature, corpus.feature_dim, line);
  }
  for (const auto &gt : image.ground_truth) {
    check_box(gt.subject_box, line);
    check_box(gt.object_box, line);
    check_index(gt.i, n_objects, "object", line);
    check_index(gt.j, n_objects, "object", line);
    check_index(gt.k, n_predicates, "predicate", line);
  }
  std::unordered_set<int> seen;
  for (const auto &gf : image.gt_pair_features) {
    check_index(gf.gt, static_cast<int>(image.ground_truth.size()), "ground truth", line);
    if (!seen.insert(gf.gt).second) {
      throw Error(ErrorKind::kParseError, at_line(line) + ": duplicate gt feature");
    }
    check_feature(gf.feature, corpus.feature_dim, line);
  }
}

Box parse_box(const ojson &j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must have 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ojson box_json(const Box &b) { return ojson::array({b.x1, b.y1, b.x2, b.y2}); }

ImageRecord parse_image(const ojson &j) {
  ImageRecord image;
  image.image_id = j.at("image_id").get<std::string>();
  for (const auto &d : j.at("detections")) {
    image.detections.push_back({parse_box(d.at("box")), d.at("class_scores").get<Vec>()});
  }
  for (const auto &p : j.at("pair_features")) {
    image.pair_features.push_back(
        {p.at("o1").get<int>(), p.at("o2").get<int>(), p.at("f").get<Vec>()});
  }
  for (const auto &g : j.at("ground_truth")) {
    image.ground_truth.push_back({parse_box(g.at("sbox")), g.at("i").get<int>(),
                                  g.at("k").get<int>(), g.at("j").get<int>(),
                                  parse_box(g.at("obox"))});
  }
  for (const auto &g : j.at("gt_pair_features")) {
    image.gt_pair_features.push_back({g.at("gt").get<int>(), g.at("f").get<Vec>()});
  }
  return image;
}

ojson image_json(const ImageRecord &image) {
  ojson j;
  j["image_id"] = image.image_id;
  j["detections"] = ojson::array();
  for (const auto &d : image.detections) {
    j["detections"].push_back({{"box", box_json(d.box)}, {"class_scores", d.class_scores}});
  }
  j["pair_features"] = ojson::array();
  for (const auto &p : image.pair_features) {
    j["pair_features"].push_back({{"o1", p.o1}, {"o2", p.o2}, {"f", p.feature}});
  }
  j["ground_truth"] = ojson::array();
  for (const auto &g : image.ground_truth) {
    j["ground_truth"].push_back({{"sbox", box_json(g.subject_box)},
                                 {"i", g.i},
                                 {"k", g.k},
                                 {"j", g.j},
                                 {"obox", box_json(g.object_box)}});
  }
  j["gt_pair_features"] = ojson::array();
  for (const auto &g : image.gt_pair_features) {
    j["gt_pair_features"].push_back({{"gt", g.gt}, {"f", g.feature}});
  }
  return j;
}

}  // namespace

void validate_corpus(const Corpus &corpus) {
  corpus.vocabulary.validate();
  if (corpus.feature_dim < 1) throw Error(ErrorKind::kParseError, "line 1: feature_dim must be >= 1");
  std::unordered_set<std::string> ids;
  for (std::size_t n = 0; n < corpus.images.size(); ++n) {
    const auto &image = corpus.images[n];
    if (!ids.insert(image.image_id).second) {
      throw Error(ErrorKind::kDuplicateImageId, image.image_id);
    }
    validate_image(image, corpus, n + 2);
  }
}

Corpus read_corpus(std::istream &in) {
  Corpus corpus;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const ojson j = ojson::parse(text);
      if (!have_header) {
        if (j.value("format", "") != kCorpusFormat) {
          throw Error(ErrorKind::kParseError, at_line(line) + ": not a " + kCorpusFormat + " header");
        }
        corpus.vocabulary.objects = j.at("objects").get<std::vector<std::string>>();
        corpus.vocabulary.predicates = j.at("predicates").get<std::vector<std::string>>();
        corpus.feature_dim = j.at("feature_dim").get<int>();
        corpus.split = j.value("split", "");
        have_header = true;
      } else {
        corpus.images.push_back(parse_image(j));
      }
    } catch (const Error &) {
      throw;
    } catch (const std::exception &e) {
      throw Error(ErrorKind::kParseError, at_line(line) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorKind::kParseError, "line 1: missing header");
  validate_corpus(corpus);
  return corpus;
}

Corpus load_corpus(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  return read_corpus(in);
}

void write_corpus(std::ostream &out, const Corpus &corpus) {
  ojson header;
  header["format"] = kCorpusFormat;
  header["objects"] = corpus.vocabulary.objects;
  header["predicates"] = corpus.vocabulary.predicates;
  header["feature_dim"] = corpus.feature_dim;
  if (!corpus.split.empty()) header["split"] = corpus.split;
  out << header.dump() << '\n';
  for (const auto &image : corpus.images) out << image_json(image).dump() << '\n';
}

void write_corpus(const std::filesystem::path &path, const Corpus &corpus) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  write_corpus(out, corpus);
}

TripleCounts triple_frequency(const Corpus &train) {
  TripleCounts counts;
  for (const auto &image : train.images) {
    for (const auto &gt : image.ground_truth) ++counts[gt.triple()];
  }
  return counts;
}

std::set<Triple> zero_shot_triples(const Corpus &train, const Corpus &test) {
  if (!(train.vocabulary == test.vocabulary)) {
    throw Error(ErrorKind::kVocabularyMismatch, "train and test vocabularies differ");
  }
  const TripleCounts seen = triple_frequency(train);
  std::set<Triple> unseen;
  for (const auto &image : test.images) {
    for (const auto &gt : image.ground_truth) {
      if (!seen.contains(gt.triple())) unseen.insert(gt.triple());
    }
  }
  return unseen;
}

}  // namespace relkit
