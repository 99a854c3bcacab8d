#include <fstream>
#include <sstream>

#include "commands.h"
#include "doctest.h"
#include "fixtures.h"
#include "relkit/config.h"
#include "relkit/training.h"

using namespace relkit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "relkit");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small synthetic corpus shared by the command tests.
const test::TempDir &world() {
  static const test::TempDir dir("cli_world");
  static const bool made = [] {
    const Run r = run({"synth", "--out", (dir / "data").string(), "--train-images", "40", "--test-images", "20",
                       "--hold-out", "2", "--seed", "3"});
    REQUIRE(r.code == 0);
    return true;
  }();
  (void)made;
  return dir;
}

std::string data(const std::string &leaf) { return (world() / "data" / leaf).string(); }

std::vector<std::string> quick_training() {
  return {"--variance-sample-count", "4000", "--frequency-pair-count", "1000", "--max-iterations", "4"};
}

Run train_into(const fs::path &out, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{"train", "--train-corpus", data("train.jsonl"), "--embeddings", data("embeddings.txt"),
                                "--out", out.string()};
  for (const auto &a : quick_training()) args.push_back(a);
  for (const auto &a : extra) args.push_back(a);
  return run(args);
}

}  // namespace

TEST_CASE("synth writes loadable corpora, embeddings and true parameters") {
  const auto &dir = world();
  for (const char *f : {"train.jsonl", "validation.jsonl", "test.jsonl", "embeddings.txt", "truth.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "data" / f));
  }
  const Corpus train = load_corpus(data("train.jsonl"));
  const Corpus test = load_corpus(data("test.jsonl"));
  CHECK(train.images.size() == 40);
  CHECK(test.images.size() == 20);
  const EmbeddingTable t = load_embeddings(data("embeddings.txt"), train.vocabulary);
  CHECK(t.dim() == 16);
  CHECK(load_model(data("truth.json")).num_predicates() == 10);
  CHECK(zero_shot_triples(train, test).size() == 2);
  const Json m = read_json_file(data("manifest.json"));
  CHECK(m["command"] == "synth");
  CHECK(m["config"]["seed"] == 3);
  CHECK(m["config"]["synth"]["hold_out"] == 2);
  CHECK(m["held_out"].size() == 2);
}

TEST_CASE("synth creates nested output directories and rejects infeasible configs") {
  test::TempDir dir("cli_synth");
  const fs::path nested = dir / "a" / "b";
  CHECK(run({"synth", "--out", nested.string(), "--train-images", "5", "--test-images", "5"}).code == 0);
  CHECK(fs::exists(nested / "train.jsonl"));
  const Run bad = run({"synth", "--out", (dir / "x").string(), "--hold-out", "60"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("InfeasibleConfig") != std::string::npos);
}

TEST_CASE("train writes a model and a monotone log, deterministically") {
  test::TempDir dir("cli_train");
  REQUIRE(train_into(dir / "a").code == 0);
  REQUIRE(train_into(dir / "b").code == 0);
  CHECK(slurp(dir / "a" / "model.json") == slurp(dir / "b" / "model.json"));
  CHECK(slurp(dir / "a" / "train.log") == slurp(dir / "b" / "train.log"));
  CHECK(load_model(dir / "a" / "model.json").num_predicates() == 10);

  std::istringstream log(slurp(dir / "a" / "train.log"));
  std::string line;
  double prev = 1e300;
  int rows = 0;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream f(line);
    double it, C, L, K, obj;
    f >> it >> C >> L >> K >> obj;
    CHECK(obj <= prev);
    prev = obj;
    ++rows;
  }
  CHECK(rows >= 2);
}

TEST_CASE("train with both lambdas zero still reports L and K") {
  test::TempDir dir("cli_train_zero");
  REQUIRE(train_into(dir.path(), {"--lambda1", "0", "--lambda2", "0"}).code == 0);
  std::istringstream log(slurp(dir / "train.log"));
  std::string line;
  while (std::getline(log, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream f(line);
    double it, C, L, K, obj;
    f >> it >> C >> L >> K >> obj;
    CHECK(obj == C);
    CHECK(L > 0.0);
  }
}

TEST_CASE("eval emits the table and zero-shot report") {
  test::TempDir dir("cli_eval");
  REQUIRE(train_into(dir / "m").code == 0);
  const std::vector<std::string> base{"eval", "--model", (dir / "m" / "model.json").string(), "--test-corpus",
                                      data("test.jsonl"), "--embeddings", data("embeddings.txt")};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return run(args);
  };
  const Run plain = with({"--out", (dir / "e").string()});
  REQUIRE(plain.code == 0);
  const std::string table = slurp(dir / "e" / "report.txt");
  for (const char *col : {"phrase", "relationship", "predicate", "R@100", "R@50"}) {
    CHECK(table.find(col) != std::string::npos);
  }
  const Json report = read_json_file((dir / "e" / "report.json").string());
  CHECK(report["results"].size() == 1);

  const Run zs = with({"--out", (dir / "z").string(), "--zero-shot", "--map", "--train-corpus", data("train.jsonl")});
  CHECK(zs.code == 0);
  CHECK(slurp(dir / "z" / "report.txt").find("zero-shot") != std::string::npos);
  CHECK(slurp(dir / "z" / "report.txt").find("mAP") != std::string::npos);

  // The training split against itself has no unseen triples.
  const Run none = run({"eval", "--model", (dir / "m" / "model.json").string(), "--test-corpus", data("train.jsonl"),
                        "--train-corpus", data("train.jsonl"), "--embeddings", data("embeddings.txt"), "--out",
                        (dir / "n").string(), "--zero-shot"});
  CHECK(none.code == 1);
  CHECK(none.err.find("NoZeroShotTriples") != std::string::npos);

  const Run a = with({"--out", (dir / "r1").string()});
  const Run b = with({"--out", (dir / "r2").string()});
  CHECK(slurp(dir / "r1" / "report.json") == slurp(dir / "r2" / "report.json"));
}

TEST_CASE("eval --ablate trains and scores the four variants") {
  test::TempDir dir("cli_ablate");
  std::vector<std::string> args{"eval", "--ablate", "--train-corpus", data("train.jsonl"), "--test-corpus",
                                data("test.jsonl"), "--embeddings", data("embeddings.txt"), "--out", dir.path().string()};
  for (const auto &a : quick_training()) args.push_back(a);
  const Run r = run(args);
  REQUIRE(r.code == 0);
  const std::string table = slurp(dir / "report.txt");
  for (const char *row : {"V only", "L only", "V + L ", "V + L + K"}) CHECK(table.find(row) != std::string::npos);
  const Json m = read_json_file((dir / "manifest.json").string());
  CHECK(m["outputs"].size() == 7);
  for (const auto &f : m["outputs"]) CHECK(fs::exists(dir / f.get<std::string>()));
}

TEST_CASE("retrieve writes rankings and metrics, deterministically") {
  test::TempDir dir("cli_retrieve");
  REQUIRE(train_into(dir / "m").code == 0);
  auto go = [&](const std::string &out) {
    return run({"retrieve", "--model", (dir / "m" / "model.json").string(), "--corpus", data("test.jsonl"),
                "--embeddings", data("embeddings.txt"), "--out", (dir / out).string()});
  };
  REQUIRE(go("a").code == 0);
  REQUIRE(go("b").code == 0);
  for (const char *f : {"rankings.jsonl", "metrics.json", "metrics.txt", "manifest.json"}) CHECK(fs::exists(dir / "a" / f));
  CHECK(slurp(dir / "a" / "rankings.jsonl") == slurp(dir / "b" / "rankings.jsonl"));
  CHECK(slurp(dir / "a" / "metrics.json") == slurp(dir / "b" / "metrics.json"));
  const Json metrics = read_json_file((dir / "a" / "metrics.json").string());
  CHECK(metrics["R@1"].get<double>() <= metrics["R@5"].get<double>());
  CHECK(metrics["R@5"].get<double>() <= metrics["R@10"].get<double>());
}

TEST_CASE("retrieve ranks a duplicated query first") {
  test::TempDir dir("cli_dup");
  REQUIRE(train_into(dir / "m").code == 0);
  Corpus corpus = load_corpus(data("test.jsonl"));
  corpus.images.resize(8);
  ImageRecord copy = corpus.images[0];
  copy.image_id = "copy";
  corpus.images.push_back(copy);
  write_corpus(dir / "dup.jsonl", corpus);
  write_text_file((dir / "rel.json").string(), R"({")" + corpus.images[0].image_id + R"(": ["copy"]})");
  const Run r = run({"retrieve", "--model", (dir / "m" / "model.json").string(), "--corpus", (dir / "dup.jsonl").string(),
                     "--embeddings", data("embeddings.txt"), "--relevance", (dir / "rel.json").string(), "--out",
                     (dir / "out").string()});
  REQUIRE(r.code == 0);
  const Json metrics = read_json_file((dir / "out" / "metrics.json").string());
  CHECK(metrics["R@1"] == 1.0);
  CHECK(metrics["median_rank"] == 1);
}

TEST_CASE("gradcheck passes by default and fails on an injected sign error") {
  test::TempDir dir("cli_grad");
  const Run ok = run({"gradcheck", "--out", (dir / "ok").string()});
  CHECK(ok.code == 0);
  const Json report = read_json_file((dir / "ok" / "gradcheck.json").string());
  std::set<double> hs;
  for (const auto &row : report["results"]) {
    hs.insert(row["h"].get<double>());
    for (const auto &[loss, r] : row["losses"].items()) CHECK(r["max_relative_error"].get<double>() < 1e-4);
  }
  CHECK(hs == std::set<double>{1e-4, 1e-5, 1e-6});

  const Run bad = run({"gradcheck", "--out", (dir / "bad").string(), "--inject-sign-error", "--fixtures", "2"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("GradientMismatch") != std::string::npos);
  CHECK(bad.err.find("coordinate") != std::string::npos);
}

TEST_CASE("configuration files, flag overrides and usage errors") {
  test::TempDir dir("cli_config");
  write_text_file((dir / "c.json").string(), R"({"synth": {"train_images": 7, "test_images": 3}, "seed": 9})");
  REQUIRE(run({"synth", "--config", (dir / "c.json").string(), "--test-images", "4", "--out", (dir / "o").string()}).code == 0);
  const Json m = read_json_file((dir / "o" / "manifest.json").string());
  CHECK(m["config"]["seed"] == 9);
  CHECK(m["config"]["synth"]["train_images"] == 7);
  CHECK(m["config"]["synth"]["test_images"] == 4);
  CHECK(load_corpus(dir / "o" / "train.jsonl").images.size() == 7);

  write_text_file((dir / "bad.json").string(), R"({"synth": {"train_imagez": 7}})");
  const Run unknown = run({"synth", "--config", (dir / "bad.json").string(), "--out", (dir / "p").string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("InvalidArgument") != std::string::npos);

  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"train", "--no-such-flag", "1"}).code == 2);
  CHECK(run({"train", "--out", (dir / "t").string()}).code == 1);
  CHECK(run({"synth", "--help"}).code == 0);
}

TEST_CASE("config JSON round-trips every field") {
  TrainingConfig tc;
  tc.lambda1 = 0.5;
  tc.direction = DescentDirection::kSubgradient;
  tc.gt_likelihood = GtLikelihood::kOne;
  const TrainingConfig back = training_config_from_json(to_json(tc));
  CHECK(to_json(back) == to_json(tc));
  CHECK(back.direction == DescentDirection::kSubgradient);
  SynthConfig sc;
  sc.hold_out = 4;
  CHECK(to_json(synth_config_from_json(to_json(sc))) == to_json(sc));
  EvalOptions eo;
  eo.k_list = {1, 7};
  CHECK(eval_options_from_json(to_json(eo)).k_list == std::vector<int>{1, 7});
  CHECK(test::error_of([] { training_config_from_json(Json{{"lambda1", "high"}}); }) == ErrorKind::kInvalidArgument);
}
