// One PASS/FAIL line per acceptance criterion, with the measured evidence.
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.h"
#include "oracles/oracles.h"
#include "relkit/embeddings.h"
#include "relkit/eval.h"
#include "relkit/experiment.h"
#include "relkit/geometry.h"
#include "relkit/gradcheck.h"
#include "relkit/retrieval.h"
#include "relkit/synthetic.h"
#include "relkit/training.h"
#include "unit/fixtures.h"

using namespace relkit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- gradients

struct FdStats {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  std::size_t kinks = 0;
};

// Central differences of a value-only loss against an analytic gradient. A
// coordinate whose forward and backward slopes disagree beyond smooth
// curvature is treated as a kink and skipped.
void central_differences(const std::function<double(const ModelParams &)> &loss, const ModelParams &at,
                         const ModelParams &analytic, double h, const std::string &label, FdStats &stats) {
  const double f0 = loss(at);
  double g_inf = 0.0;
  for (double g : analytic.values()) g_inf = std::max(g_inf, std::abs(g));
  const double floor = 1e-6 * std::max(1.0, g_inf);
  ModelParams probe = at;
  for (std::size_t n = 0; n < probe.values().size(); ++n) {
    const double x = probe.values()[n];
    probe.values()[n] = x + h;
    const double plus = loss(probe);
    probe.values()[n] = x - h;
    const double minus = loss(probe);
    probe.values()[n] = x;
    const double fwd = (plus - f0) / h;
    const double bwd = (f0 - minus) / h;
    if (std::abs(fwd - bwd) > 1e-3 * std::max({1.0, std::abs(fwd), std::abs(bwd)})) {
      ++stats.kinks;
      continue;
    }
    ++stats.checked;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic.values()[n];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
    if (rel > stats.worst || stats.where.empty()) {
      stats.worst = std::max(stats.worst, rel);
      stats.where = label + " " + at.coordinate_name(n);
    }
  }
}

Verdict gradient_correctness() {
  constexpr double kH = 1e-5;
  constexpr double kTol = 1e-4;
  std::map<std::string, FdStats> per_loss;
  int fixtures = 0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    const Activation act = seed > 20 ? Activation::kRawLinear : Activation::kSoftmax;
    const GradcheckFixture fx = make_gradcheck_fixture(seed, act);
    const VocabEmbeddings emb(fx.vocabulary, fx.table);
    const auto units = make_training_units(fx.corpus, fx.config.gt_likelihood);
    TrainingConfig config = fx.config;
    config.variant = TrainVariant::kFull;
    const TrainingProblem problem(units, emb, fx.samples, config);
    const std::string tag = "fixture " + std::to_string(seed);

    struct Entry {
      const char *name;
      std::function<double(const ModelParams &, ModelParams *)> fn;
    };
    const std::vector<Entry> losses = {
        {"C", [&](const ModelParams &p, ModelParams *g) { return loss_C(p, emb, units, {}, g); }},
        {"L", [&](const ModelParams &p, ModelParams *g) { return loss_L(p, emb, fx.samples.frequency, g); }},
        {"K", [&](const ModelParams &p, ModelParams *g) { return loss_K(p, emb, fx.samples.variance, g); }},
        {"objective",
         [&](const ModelParams &p, ModelParams *g) {
           if (g == nullptr) return problem.evaluate(p).objective;
           return problem.gradient(p, *g).objective;
         }},
    };
    for (const auto &e : losses) {
      ModelParams analytic = fx.params.zeros_like();
      e.fn(fx.params, &analytic);
      central_differences([&](const ModelParams &p) { return e.fn(p, nullptr); }, fx.params, analytic, kH,
                          tag, per_loss[e.name]);
    }
    ++fixtures;
  }
  bool pass = fixtures >= 20;
  std::string detail = fmt("%d fixtures, h=%g;", fixtures, kH);
  for (const auto &[name, s] : per_loss) {
    const double kink_share = static_cast<double>(s.kinks) / static_cast<double>(s.kinks + s.checked);
    pass = pass && s.worst < kTol && s.checked > 0 && kink_share < 0.25;
    detail += fmt(" %s max rel %.2e at %s (%zu checked, %zu kinks);", name.c_str(), s.worst, s.where.c_str(),
                  s.checked, s.kinks);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- oracles

Verdict oracle_equivalence() {
  std::mt19937_64 rng(2024);
  int fixtures = 0;
  int loss_checks = 0, loss_bad = 0;
  int eval_checks = 0, eval_bad = 0;
  int rank_checks = 0, rank_bad = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const int N = 2 + trial % 2;
    const int K = 2 + (trial / 2) % 2;
    const int images = 1 + trial % 5;
    Corpus corpus = test::random_corpus(images, N, K, 3, rng);
    const VocabEmbeddings emb(corpus.vocabulary, test::random_table(corpus.vocabulary, 2, rng));
    const ModelParams p =
        test::random_params(K, 3, 2, rng, trial % 3 == 0 ? Activation::kRawLinear : Activation::kSoftmax);
    ++fixtures;

    for (GtLikelihood g : {GtLikelihood::kDetector, GtLikelihood::kOne}) {
      ++loss_checks;
      loss_bad += loss_C(p, emb, corpus, g) != oracle::loss_C(p, emb, corpus, g);
    }
    ++loss_checks;
    RankLossOptions fixed;
    fixed.language_fixed = true;
    const auto units = make_training_units(corpus, GtLikelihood::kDetector);
    loss_bad += loss_C(p, emb, units, fixed) != oracle::loss_C(p, emb, corpus, GtLikelihood::kDetector, true);

    EvalOptions opt;
    opt.k_list = {1, 2, 3, 5, 10, 100};
    opt.labels_per_box = 1 + trial % 2;
    opt.max_per_pair = trial % 4 == 3 ? 0 : 1;
    opt.score_mode = trial % 7 == 5 ? ScoreMode::kVisualOnly : ScoreMode::kJoint;
    for (EvalMode m : kAllEvalModes) {
      ++eval_checks;
      std::size_t total = 0;
      const auto matched = oracle::matched_counts(p, emb, corpus, m, opt, total);
      const EvalReport r = evaluate(p, emb, corpus, m, opt);
      eval_bad += r.gt_total != total || r.matched != matched;
    }

    DescriptorOptions dopt;
    dopt.n = 1 + trial % 6;
    dopt.labels_per_box = 1 + trial % 2;
    for (const auto &query : corpus.images) {
      if (corpus.images.size() < 2) break;
      ++rank_checks;
      const auto got = rank_corpus(p, emb, query, corpus, dopt);
      const auto want = oracle::rank_corpus(p, emb, query, corpus, dopt);
      bool same = got.size() == want.size();
      for (std::size_t n = 0; same && n < got.size(); ++n) {
        same = got[n].image_id == want[n].image_id && got[n].score == want[n].score;
      }
      rank_bad += !same;
    }
  }
  return {loss_bad == 0 && eval_bad == 0 && rank_bad == 0,
          fmt("%d fixtures (<=5 images, N,K in {2,3}); loss_C %d/%d, evaluate %d/%d, rank_corpus %d/%d exact",
              fixtures, loss_checks - loss_bad, loss_checks, eval_checks - eval_bad, eval_checks,
              rank_checks - rank_bad, rank_checks)};
}

// ---------------------------------------------------------------- random guess

Verdict random_guess_anchor() {
  constexpr long long kCandidates = 100LL * 70 * 100;
  constexpr int kTop = 100;
  constexpr long long kTrials = 20'000'000;
  const double analytic = random_guess_recall(static_cast<double>(kCandidates), kTop);
  const double exact = static_cast<double>(kTop) / static_cast<double>(kCandidates);
  // The GT lands in the top 100 when fewer than 100 of the other uniform
  // scores exceed its own; that count is Binomial(n - 1, 1 - u).
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  long long hits = 0;
  for (long long t = 0; t < kTrials; ++t) {
    const double u = uni(rng);
    std::binomial_distribution<long long> above(kCandidates - 1, 1.0 - u);
    hits += above(rng) < kTop;
  }
  const double mc = static_cast<double>(hits) / static_cast<double>(kTrials);
  const double rel = std::abs(mc - analytic) / analytic;
  const bool pass = analytic == exact && std::abs(analytic - 0.00014) < 0.000005 && rel < 0.2;
  return {pass, fmt("analytic %.7f (100/700000 = %.7f), Monte Carlo %.7f over %lld trials, rel diff %.3f", analytic,
                    exact, mc, kTrials, rel)};
}

// ---------------------------------------------------------------- convergence

struct World {
  SyntheticData data;
  std::optional<VocabEmbeddings> emb;
};

const World &default_world() {
  static World w = [] {
    World out;
    out.data = generate_synthetic(SynthConfig{}, 1);
    out.emb.emplace(out.data.train.vocabulary, out.data.embeddings);
    return out;
  }();
  return w;
}

const TrainResult &default_model() {
  static const TrainResult r = train(default_world().data.train, *default_world().emb, TrainingConfig{});
  return r;
}

Verdict convergence() {
  const World &w = default_world();
  const SynthConfig sc;
  const TrainResult &r = default_model();
  bool monotone = true;
  for (std::size_t n = 1; n < r.history.size(); ++n) {
    monotone = monotone && r.history[n].loss.objective <= r.history[n - 1].loss.objective;
  }
  const int iterations = static_cast<int>(r.history.size()) - 1;
  const bool shape = sc.num_objects == 20 && sc.num_predicates == 10 && sc.feature_dim == 32 &&
                     w.data.train.images.size() == 500;
  return {shape && monotone && r.converged && iterations <= 25,
          fmt("N=%d K=%d D=%d, %zu train images; %d outer iterations, converged=%d, non-increasing=%d, "
              "objective %.4f -> %.4f",
              sc.num_objects, sc.num_predicates, sc.feature_dim, w.data.train.images.size(), iterations,
              r.converged, monotone, r.history.front().loss.objective, r.history.back().loss.objective)};
}

// ---------------------------------------------------------------- ablation

Verdict ablation_direction() {
  std::map<std::string, std::vector<double>> recall;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticData data = generate_synthetic(SynthConfig{}, seed);
    const VocabEmbeddings emb(data.train.vocabulary, data.embeddings);
    TrainingConfig base;
    base.seed = seed;
    EvalRequest request;
    request.options.k_list = {100};
    request.modes = {EvalMode::kPredicate};
    const AblationRun run = run_ablation(data.train, data.test, emb, base, request);
    per_seed += fmt(" s%d", static_cast<int>(seed));
    for (const auto &row : run.tables.rows) {
      const double r = row.reports.at(0).recall_at(100);
      recall[row.name].push_back(r);
      per_seed += fmt(" %.4f", r);
    }
  }
  const double v = median5(recall["V only"]);
  const double l = median5(recall["L only"]);
  const double vl = median5(recall["V + L"]);
  const double full = median5(recall["V + L + K"]);
  return {full >= vl && vl >= std::max(v, l),
          fmt("median predicate R@100: V+L+K %.4f, V+L %.4f, V %.4f, L %.4f; per seed (V, L, V+L, V+L+K):", full,
              vl, v, l) +
              per_seed};
}

// ---------------------------------------------------------------- zero-shot

Verdict zero_shot_direction() {
  std::vector<double> vl, full;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.hold_out = 5;
    const SyntheticData data = generate_synthetic(sc, seed);
    const VocabEmbeddings emb(data.train.vocabulary, data.embeddings);
    EvalOptions options;
    options.k_list = {100};
    std::size_t total = 0;
    for (double lambda2 : {0.0, TrainingConfig{}.lambda2}) {
      TrainingConfig tc;
      tc.seed = seed;
      tc.lambda2 = lambda2;
      const TrainResult r = train(data.train, emb, tc);
      const EvalReport z = evaluate_zero_shot(r.params, emb, data.train, data.test, EvalMode::kPredicate, options);
      (lambda2 == 0.0 ? vl : full).push_back(z.recall_at(100));
      total = z.gt_total;
    }
    per_seed += fmt(" s%d %.4f/%.4f (%zu GT)", static_cast<int>(seed), vl.back(), full.back(), total);
  }
  const double a = median5(vl);
  const double b = median5(full);
  return {b >= a, fmt("5 held-out triple types; median zero-shot predicate R@100: V+L+K %.4f, V+L %.4f; per seed "
                      "(V+L/V+L+K):",
                      b, a) +
                      per_seed};
}

// ---------------------------------------------------------------- invariance

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "relkit");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict invariance_suite() {
  std::vector<std::string> failures;
  std::mt19937_64 rng(99);

  // L and K under a common dyadic shift of every b_k.
  {
    std::uniform_int_distribution<int> q(-16, 16);
    int bad = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const auto v = test::vocabulary(5, 4);
      EmbeddingTable table(4);
      for (const auto *list : {&v.objects, &v.predicates}) {
        for (const auto &name : *list) {
          table.add(name, {q(rng) / 8.0, q(rng) / 8.0, q(rng) / 8.0, (q(rng) | 1) / 8.0});
        }
      }
      const VocabEmbeddings emb(v, table);
      ModelParams p(4, 2, 4);
      for (double &x : p.values()) x = q(rng) / 4.0;
      const auto variance = sample_variance_pairs(emb, 400, trial + 1);
      TripleCounts freq{{{0, 0, 1}, 5}, {{1, 2, 3}, 3}, {{2, 1, 2}, 2}, {{4, 3, 0}, 1}};
      const auto frequency = sample_frequency_pairs(freq, v, 400, trial + 2);
      ModelParams shifted = p;
      const double c = q(rng) / 2.0;
      for (int k = 0; k < 4; ++k) shifted.b(k) += c;
      bad += loss_L(shifted, emb, frequency) != loss_L(p, emb, frequency);
      bad += loss_K(shifted, emb, variance) != loss_K(p, emb, variance);
    }
    if (bad != 0) failures.push_back(fmt("bias shift %d", bad));
  }

  // Recall@k is monotone in k in every mode.
  {
    const World &w = default_world();
    EvalOptions opt;
    opt.k_list = {1, 2, 5, 10, 20, 50, 100, 1000};
    opt.labels_per_box = 2;
    int bad = 0;
    for (EvalMode m : kAllEvalModes) {
      const EvalReport r = evaluate(default_model().params, *w.emb, w.data.test, m, opt);
      for (std::size_t n = 1; n < r.recall.size(); ++n) bad += r.recall[n - 1] > r.recall[n];
    }
    if (bad != 0) failures.push_back(fmt("recall monotonicity %d", bad));
  }

  // IoU and cosine distance: bounds, symmetry and identity.
  {
    int bad = 0;
    std::uniform_real_distribution<double> pos(-50, 250), len(0.5, 120);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 100000; ++t) {
      const double x1 = pos(rng), y1 = pos(rng), x2 = pos(rng), y2 = pos(rng);
      const Box a{x1, y1, x1 + len(rng), y1 + len(rng)};
      const Box b = t % 3 == 0 ? Box{a.x1 + 1, a.y1, a.x2 + 1, a.y2} : Box{x2, y2, x2 + len(rng), y2 + len(rng)};
      const double ab = iou(a, b);
      bad += !(ab >= 0.0 && ab <= 1.0) || ab != iou(b, a) || iou(a, a) != 1.0;
      Vec u(1 + t % 8), v(u.size());
      for (std::size_t n = 0; n < u.size(); ++n) {
        u[n] = g(rng);
        v[n] = t % 5 == 0 ? -u[n] : g(rng);
      }
      const double d = cosine_distance(u, v);
      bad += !(d >= 0.0 && d <= 2.0) || d != cosine_distance(v, u) || cosine_distance(u, u) != 0.0;
    }
    if (bad != 0) failures.push_back(fmt("iou/cosine %d", bad));
  }

  // Byte-identical model and report files across reruns.
  {
    test::TempDir dir("acceptance_rerun");
    const std::string data = (dir / "data").string();
    int code = run_cli({"synth", "--out", data, "--train-images", "80", "--test-images", "40", "--hold-out", "2",
                        "--seed", "11"});
    for (const char *tag : {"a", "b"}) {
      const std::string m = (dir / (std::string("m") + tag)).string();
      code |= run_cli({"train", "--train-corpus", data + "/train.jsonl", "--embeddings", data + "/embeddings.txt",
                       "--out", m, "--threads", "3", "--seed", "5"});
      code |= run_cli({"eval", "--model", m + "/model.json", "--test-corpus", data + "/test.jsonl", "--train-corpus",
                       data + "/train.jsonl", "--embeddings", data + "/embeddings.txt", "--zero-shot", "--map",
                       "--threads", "3", "--out", (dir / (std::string("e") + tag)).string()});
    }
    const bool same = code == 0 && slurp(dir / "ma" / "model.json") == slurp(dir / "mb" / "model.json") &&
                      slurp(dir / "ma" / "train.log") == slurp(dir / "mb" / "train.log") &&
                      slurp(dir / "ea" / "report.json") == slurp(dir / "eb" / "report.json") &&
                      slurp(dir / "ea" / "report.txt") == slurp(dir / "eb" / "report.txt") &&
                      !slurp(dir / "ma" / "model.json").empty();
    if (!same) failures.push_back(fmt("rerun (exit %d)", code));
  }

  std::string detail = "bias shift, recall monotonicity, iou/cosine bounds+symmetry, rerun byte-equality";
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto &f : failures) detail += " " + f;
  } else {
    detail += " all exact";
  }
  return {failures.empty(), detail};
}

// ---------------------------------------------------------------- retrieval

Verdict retrieval_sanity() {
  std::vector<std::string> failures;

  // Every test image queried against the test split plus its own duplicate,
  // named to lose every score tie.
  const World &w = default_world();
  const ModelParams &params = default_model().params;
  Corpus corpus = w.data.test;
  int first = 0;
  const int queries = static_cast<int>(corpus.images.size());
  for (int n = 0; n < queries; ++n) {
    ImageRecord dup = corpus.images[n];
    dup.image_id = "~duplicate";
    corpus.images.push_back(dup);
    const auto ranked = rank_corpus(params, *w.emb, w.data.test.images[n], corpus);
    first += !ranked.empty() && ranked[0].image_id == "~duplicate";
    corpus.images.pop_back();
  }
  if (first != queries) failures.push_back(fmt("duplicate first for %d/%d queries", first, queries));

  // Hand-worked descriptors and metrics over 3 queries.
  const Triple A{0, 0, 1}, B{1, 2, 0}, C{2, 1, 1}, D{0, 1, 2};
  const RelDescriptor q1{"q1", {{A, 1.0}, {B, 0.5}}};
  const RelDescriptor q2{"q2", {{C, 1.0}}};
  const RelDescriptor q3{"q3", {{D, 1.0}, {A, 0.25}}};
  const std::vector<RelDescriptor> pool = {
      {"c1", {{B, 0.8}, {C, 1.0}}},
      {"c2", {{A, 1.0}, {D, 0.5}}},
      {"c3", {{C, 0.5}, {D, 1.0}}},
      {"c4", {{A, 0.5}, {B, 1.0}}},
      {"q1", {{A, 1.0}, {B, 0.5}}},
  };
  // q1: c2 1.0, c4 1.0, c1 0.4, c3 0 (q1 itself excluded).
  // q2: c1 1.0, c3 0.5, c2 0, c4 0, q1 0.
  // q3: c3 1.0, c2 0.75, q1 0.25, c4 0.125, c1 0.
  const auto r1 = rank_descriptors(q1, pool);
  const auto r2 = rank_descriptors(q2, pool);
  const auto r3 = rank_descriptors(q3, pool);
  auto ids = [](const std::vector<RankedImage> &r) {
    std::string s;
    for (const auto &x : r) s += x.image_id + ":" + fmt("%g", x.score) + " ";
    return s;
  };
  if (ids(r1) != "c2:1 c4:1 c1:0.4 c3:0 " || ids(r2) != "c1:1 c3:0.5 c2:0 c4:0 q1:0 " ||
      ids(r3) != "c3:1 c2:0.75 q1:0.25 c4:0.125 c1:0 ") {
    failures.push_back("hand rankings: " + ids(r1) + "| " + ids(r2) + "| " + ids(r3));
  }
  // Relevant sets put the first hit at ranks 3, 2 and 1.
  const std::map<std::string, std::set<std::string>> relevance = {
      {"q1", {"c1"}}, {"q2", {"c3", "c4"}}, {"q3", {"c3"}}};
  const RetrievalReport m = retrieval_metrics({{"q1", r1}, {"q2", r2}, {"q3", r3}}, relevance);
  if (m.recall_at_1 != 1.0 / 3.0 || m.recall_at_5 != 1.0 || m.recall_at_10 != 1.0 || m.median_rank != 2 ||
      m.queries != 3) {
    failures.push_back(fmt("metrics R@1 %g R@5 %g R@10 %g median %d", m.recall_at_1, m.recall_at_5,
                           m.recall_at_10, m.median_rank));
  }
  // First relevant at ranks 2, 4 and 9 of a ten-item list.
  std::vector<QueryRanking> deep;
  std::map<std::string, std::set<std::string>> deep_rel;
  const int hit[3] = {2, 4, 9};
  for (int qn = 0; qn < 3; ++qn) {
    QueryRanking qr{"d" + std::to_string(qn), {}};
    for (int r = 1; r <= 10; ++r) qr.ranking.push_back({"x" + std::to_string(r), 11.0 - r});
    deep_rel[qr.query_id] = {"x" + std::to_string(hit[qn])};
    deep.push_back(qr);
  }
  const RetrievalReport d = retrieval_metrics(deep, deep_rel);
  if (d.recall_at_1 != 0.0 || d.recall_at_5 != 2.0 / 3.0 || d.recall_at_10 != 1.0 || d.median_rank != 4) {
    failures.push_back(fmt("deep metrics R@1 %g R@5 %g R@10 %g median %d", d.recall_at_1, d.recall_at_5,
                           d.recall_at_10, d.median_rank));
  }

  std::string detail = fmt("duplicate ranked first for %d/%d test queries; 3-query hand fixtures", first, queries);
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto &f : failures) detail += " " + f;
  } else {
    detail += " exact";
  }
  return {failures.empty(), detail};
}

}  // namespace

// An optional argument runs only the criteria whose names contain it.
int main(int argc, char **argv) {
  const std::string only = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char *, Verdict (*)()>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"oracle equivalence", oracle_equivalence},
      {"random-guess anchor", random_guess_anchor},
      {"convergence", convergence},
      {"ablation direction", ablation_direction},
      {"zero-shot direction", zero_shot_direction},
      {"invariance suite", invariance_suite},
      {"retrieval sanity", retrieval_sanity},
  };
  int failed = 0;
  for (const auto &[name, fn] : criteria) {
    if (std::string(name).find(only) == std::string::npos) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception &e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s (%.1fs): %s\n", v.pass ? "PASS" : "FAIL", name, seconds_since(t0), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
