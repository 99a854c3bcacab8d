#include "commands.h"

#include <charconv>
#include <filesystem>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "relkit/error.h"
#include "relkit/experiment.h"
#include "relkit/gradcheck.h"

namespace relkit::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char *kVersion = "1.0.0";
constexpr std::string_view kCommands[] = {"synth", "train", "eval", "retrieve", "gradcheck"};

[[noreturn]] void invalid(const std::string &what) { throw Error(ErrorKind::kInvalidArgument, what); }

const Json &field(const Json &config, const char *key) {
  if (!config.contains(key)) invalid(std::string("missing key '") + key + "'");
  return config.at(key);
}

std::string text(const Json &config, const char *key) {
  const Json &v = field(config, key);
  if (!v.is_string()) invalid(std::string(key) + ": expected a string");
  return v.get<std::string>();
}

std::string required_path(const Json &config, const char *key) {
  std::string path = text(config, key);
  if (path.empty()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    invalid("--" + flag + " is required");
  }
  return path;
}

long long integer(const Json &config, const char *key) {
  const Json &v = field(config, key);
  if (!v.is_number_integer()) invalid(std::string(key) + ": expected an integer");
  return v.get<long long>();
}

double number(const Json &config, const char *key) {
  const Json &v = field(config, key);
  if (!v.is_number()) invalid(std::string(key) + ": expected a number");
  return v.get<double>();
}

bool boolean(const Json &config, const char *key) {
  const Json &v = field(config, key);
  if (!v.is_boolean()) invalid(std::string(key) + ": expected a boolean");
  return v.get<bool>();
}

std::uint64_t seed_of(const Json &config) {
  const long long seed = integer(config, "seed");
  if (seed < 0) invalid("seed must be >= 0");
  return static_cast<std::uint64_t>(seed);
}

int threads_of(const Json &config) {
  const long long threads = integer(config, "threads");
  if (threads < 1) invalid("threads must be >= 1");
  return static_cast<int>(threads);
}

fs::path output_dir(const Json &config) {
  fs::path out = text(config, "out");
  if (out.empty()) invalid("--out must not be empty");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + out.string() + ": " + ec.message());
  return out;
}

Json manifest(const Json &config, const std::vector<std::string> &outputs) {
  Json m;
  m["tool"] = "relkit";
  m["version"] = kVersion;
  m["command"] = config.at("command");
  m["config"] = config;
  m["outputs"] = outputs;
  return m;
}

void write_manifest(const fs::path &out, Json &m) {
  m["outputs"].push_back("manifest.json");
  write_text_file((out / "manifest.json").string(), m.dump(2) + "\n");
}

Json triple_json(const Triple &t, const CategoryVocabulary &vocab) {
  Json j;
  j["i"] = t.i;
  j["k"] = t.k;
  j["j"] = t.j;
  j["names"] = vocab.objects[t.i] + " " + vocab.predicates[t.k] + " " + vocab.objects[t.j];
  return j;
}

std::string slug(std::string name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string round_trip(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

Json default_config(std::string_view command) {
  Json c;
  c["command"] = command;
  c["seed"] = 1;
  c["out"] = std::string(command);
  c["threads"] = 1;
  if (command == "synth") {
    c["synth"] = to_json(SynthConfig{});
  } else if (command == "train") {
    c["train_corpus"] = "";
    c["embeddings"] = "";
    c["training"] = to_json(TrainingConfig{});
  } else if (command == "eval") {
    c["model"] = "";
    c["train_corpus"] = "";
    c["test_corpus"] = "";
    c["embeddings"] = "";
    c["zero_shot"] = false;
    c["map"] = false;
    c["ablate"] = false;
    c["eval"] = to_json(EvalOptions{});
    c["training"] = to_json(TrainingConfig{});
  } else if (command == "retrieve") {
    c["model"] = "";
    c["corpus"] = "";
    c["embeddings"] = "";
    c["relevance"] = "";
    c["queries"] = 0;
    c["descriptor"] = to_json(DescriptorOptions{});
  } else if (command == "gradcheck") {
    c["fixtures"] = 20;
    c["step_sizes"] = {1e-4, 1e-5, 1e-6};
    c["tolerance"] = 1e-4;
    c["activation"] = "softmax";
    c["inject_sign_error"] = false;
  } else {
    invalid("unknown command '" + std::string(command) + "'");
  }
  return c;
}

Json cmd_synth(const Json &config, std::ostream &log) {
  const SynthConfig sc = synth_config_from_json(field(config, "synth"));
  const std::uint64_t seed = seed_of(config);
  const fs::path out = output_dir(config);
  const SyntheticData data = generate_synthetic(sc, seed);

  write_corpus(out / "train.jsonl", data.train);
  write_corpus(out / "validation.jsonl", data.validation);
  write_corpus(out / "test.jsonl", data.test);
  write_embeddings(out / "embeddings.txt", data.embeddings);
  save_model(out / "truth.json", data.truth);

  Json m = manifest(config, {"train.jsonl", "validation.jsonl", "test.jsonl", "embeddings.txt",
                             "truth.json"});
  Json held = Json::array();
  for (const Triple &t : data.held_out) held.push_back(triple_json(t, data.train.vocabulary));
  m["held_out"] = held;
  m["counts"] = {{"train_images", data.train.images.size()},
                 {"train_relationships", data.train.gt_count()},
                 {"validation_images", data.validation.images.size()},
                 {"test_images", data.test.images.size()},
                 {"test_relationships", data.test.gt_count()}};
  write_manifest(out, m);
  log << "synth: " << data.train.images.size() << " train / " << data.validation.images.size()
      << " validation / " << data.test.images.size() << " test images, " << data.held_out.size()
      << " held-out triple types -> " << out.string() << "\n";
  return m;
}

Json cmd_train(const Json &config, std::ostream &log) {
  TrainingConfig tc = training_config_from_json(field(config, "training"));
  tc.seed = seed_of(config);
  tc.threads = threads_of(config);
  const Corpus corpus = load_corpus(required_path(config, "train_corpus"));
  const EmbeddingTable table = load_embeddings(required_path(config, "embeddings"), corpus.vocabulary);
  const VocabEmbeddings emb(corpus.vocabulary, table);
  const fs::path out = output_dir(config);

  const TrainResult result = train(corpus, emb, tc);
  save_model(out / "model.json", result.params);
  write_text_file((out / "train.log").string(), format_training_log(result.history));

  Json m = manifest(config, {"model.json", "train.log"});
  const auto &last = result.history.back();
  m["result"] = {{"iterations", last.iteration},
                 {"converged", result.converged},
                 {"C", last.loss.C},
                 {"L", last.loss.L},
                 {"K", last.loss.K},
                 {"objective", last.loss.objective}};
  write_manifest(out, m);
  log << "train: " << variant_name(tc.variant) << ", " << last.iteration << " iterations, objective "
      << round_trip(result.history.front().loss.objective) << " -> " << round_trip(last.loss.objective)
      << (result.converged ? " (converged)" : " (iteration limit)") << "\n";
  return m;
}

Json cmd_eval(const Json &config, std::ostream &log) {
  EvalRequest request;
  request.options = eval_options_from_json(field(config, "eval"));
  request.options.threads = threads_of(config);
  request.zero_shot = boolean(config, "zero_shot");
  request.mean_ap = boolean(config, "map");
  const bool ablate = boolean(config, "ablate");
  const std::string model_path = text(config, "model");
  const std::string train_path = text(config, "train_corpus");
  if (model_path.empty() && !ablate) invalid("nothing to evaluate: give --model or --ablate");
  if ((ablate || request.zero_shot) && train_path.empty()) {
    invalid(std::string(ablate ? "--ablate" : "--zero-shot") + " needs --train-corpus");
  }

  const Corpus test = load_corpus(required_path(config, "test_corpus"));
  const EmbeddingTable table = load_embeddings(required_path(config, "embeddings"), test.vocabulary);
  const VocabEmbeddings emb(test.vocabulary, table);
  std::optional<Corpus> train;
  if (!train_path.empty()) {
    train = load_corpus(train_path);
    if (!(train->vocabulary == test.vocabulary)) {
      throw Error(ErrorKind::kVocabularyMismatch, "train and test corpora differ in vocabulary");
    }
  }
  const Corpus *train_ptr = train ? &*train : nullptr;
  const fs::path out = output_dir(config);
  std::vector<std::string> outputs;

  EvalTables tables;
  if (!model_path.empty()) {
    const ModelParams params = load_model(model_path);
    evaluate_into(tables, "model", params, emb, train_ptr, test, request, request.options.score_mode);
  }
  if (ablate) {
    TrainingConfig base = training_config_from_json(field(config, "training"));
    base.seed = seed_of(config);
    base.threads = threads_of(config);
    AblationRun run = run_ablation(*train, test, emb, base, request);
    for (std::size_t v = 0; v < run.variants.size(); ++v) {
      const std::string name = "model_" + slug(run.variants[v].name) + ".json";
      save_model(out / name, run.trained[v].params);
      outputs.push_back(name);
    }
    for (auto &row : run.tables.rows) tables.rows.push_back(std::move(row));
    for (auto &row : run.tables.zero_shot_rows) tables.zero_shot_rows.push_back(std::move(row));
  }

  const std::string table_text = format_tables(tables);
  write_text_file((out / "report.json").string(), tables_to_json(tables));
  write_text_file((out / "report.txt").string(), table_text);
  outputs.push_back("report.json");
  outputs.push_back("report.txt");
  Json m = manifest(config, outputs);
  write_manifest(out, m);
  log << table_text;
  return m;
}

Json cmd_retrieve(const Json &config, std::ostream &log) {
  DescriptorOptions options = descriptor_options_from_json(field(config, "descriptor"));
  const Corpus corpus = load_corpus(required_path(config, "corpus"));
  const EmbeddingTable table = load_embeddings(required_path(config, "embeddings"), corpus.vocabulary);
  const VocabEmbeddings emb(corpus.vocabulary, table);
  const ModelParams params = load_model(required_path(config, "model"));
  const long long query_limit = integer(config, "queries");
  if (query_limit < 0) invalid("queries must be >= 0");

  std::map<std::string, std::set<std::string>> relevance;
  const std::string relevance_path = text(config, "relevance");
  if (relevance_path.empty()) {
    relevance = dominant_triple_relevance(corpus);
  } else {
    const Json j = read_json_file(relevance_path);
    if (!j.is_object()) throw Error(ErrorKind::kParseError, relevance_path + ": expected an object");
    for (const auto &[query, ids] : j.items()) {
      if (!ids.is_array()) throw Error(ErrorKind::kParseError, relevance_path + ": '" + query + "' is not an array");
      for (const auto &id : ids) {
        if (!id.is_string()) throw Error(ErrorKind::kParseError, relevance_path + ": ids must be strings");
        relevance[query].insert(id.get<std::string>());
      }
    }
  }

  std::vector<RelDescriptor> descriptors;
  descriptors.reserve(corpus.images.size());
  for (const auto &image : corpus.images) descriptors.push_back(build_descriptor(params, emb, image, options));

  // Queries: corpus images with at least one relevant candidate, in corpus order.
  std::vector<QueryRanking> rankings;
  std::size_t skipped = 0;
  for (std::size_t q = 0; q < corpus.images.size(); ++q) {
    if (query_limit > 0 && static_cast<long long>(rankings.size()) >= query_limit) break;
    const auto it = relevance.find(corpus.images[q].image_id);
    if (it == relevance.end() || it->second.empty()) {
      skipped += it != relevance.end();
      continue;
    }
    rankings.push_back({corpus.images[q].image_id, rank_descriptors(descriptors[q], descriptors)});
  }
  if (rankings.empty()) throw Error(ErrorKind::kMissingRelevance, "no query has a relevant candidate");
  const RetrievalReport report = retrieval_metrics(rankings, relevance);

  const fs::path out = output_dir(config);
  std::string lines;
  for (const auto &r : rankings) {
    for (std::size_t n = 0; n < r.ranking.size(); ++n) {
      Json line;
      line["query_id"] = r.query_id;
      line["rank"] = n + 1;
      line["image_id"] = r.ranking[n].image_id;
      line["score"] = r.ranking[n].score;
      lines += line.dump() + "\n";
    }
  }
  write_text_file((out / "rankings.jsonl").string(), lines);
  Json metrics;
  metrics["R@1"] = report.recall_at_1;
  metrics["R@5"] = report.recall_at_5;
  metrics["R@10"] = report.recall_at_10;
  metrics["median_rank"] = report.median_rank;
  metrics["queries"] = report.queries;
  metrics["skipped_queries"] = skipped;
  write_text_file((out / "metrics.json").string(), metrics.dump(2) + "\n");
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%8s %8s %8s %12s\n%8.2f %8.2f %8.2f %12d\n", "R@1", "R@5", "R@10",
                "median rank", 100.0 * report.recall_at_1, 100.0 * report.recall_at_5,
                100.0 * report.recall_at_10, report.median_rank);
  write_text_file((out / "metrics.txt").string(), buf);

  Json m = manifest(config, {"rankings.jsonl", "metrics.json", "metrics.txt"});
  write_manifest(out, m);
  log << "retrieve: " << report.queries << " queries\n" << buf;
  return m;
}

Json cmd_gradcheck(const Json &config, std::ostream &log) {
  const long long fixtures = integer(config, "fixtures");
  if (fixtures < 1) invalid("fixtures must be >= 1");
  const double tolerance = number(config, "tolerance");
  const Activation activation = parse_activation(text(config, "activation"));
  const bool inject = boolean(config, "inject_sign_error");
  const Json &hs = field(config, "step_sizes");
  if (!hs.is_array() || hs.empty()) invalid("h: expected a non-empty list");
  std::vector<double> steps;
  for (const auto &h : hs) {
    if (!h.is_number() || h.get<double>() <= 0.0) invalid("h: every step must be > 0");
    steps.push_back(h.get<double>());
  }
  const std::uint64_t seed = seed_of(config);

  std::function<void(ModelParams &)> tamper;
  if (inject) {
    tamper = [](ModelParams &g) {
      for (double &v : g.values()) v = -v;
    };
  }

  std::vector<GradcheckFixture> fixture_set;
  for (long long f = 0; f < fixtures; ++f) {
    fixture_set.push_back(make_gradcheck_fixture(seed + static_cast<std::uint64_t>(f), activation));
  }

  Json results = Json::array();
  bool passed = true;
  std::string first_failure;
  log << "gradcheck: " << fixtures << " fixtures, tolerance " << round_trip(tolerance) << "\n";
  for (double h : steps) {
    Json per_h;
    per_h["h"] = h;
    Json losses;
    for (LossSelector sel : {LossSelector::kC, LossSelector::kL, LossSelector::kK, LossSelector::kObjective}) {
      GradcheckResult worst;
      long long worst_fixture = 0;
      std::size_t kinks = 0;
      std::size_t checked = 0;
      for (long long f = 0; f < fixtures; ++f) {
        GradcheckResult r = finite_difference_check(sel, fixture_set[f], h, tamper);
        kinks += r.kinks;
        checked += r.checked;
        if (f == 0 || r.max_relative_error > worst.max_relative_error) {
          worst = r;
          worst_fixture = f;
        }
      }
      const bool ok = worst.passed(tolerance);
      Json j;
      j["max_relative_error"] = worst.max_relative_error;
      j["worst_coordinate"] = worst.worst_coordinate;
      j["fixture_seed"] = seed + static_cast<std::uint64_t>(worst_fixture);
      j["analytic"] = worst.analytic;
      j["numeric"] = worst.numeric;
      j["checked"] = checked;
      j["kinks"] = kinks;
      j["passed"] = ok;
      losses[std::string(loss_selector_name(sel))] = j;
      char buf[200];
      std::snprintf(buf, sizeof(buf), "  h=%-8s %-9s max rel err %.3e at %s%s\n", round_trip(h).c_str(),
                    std::string(loss_selector_name(sel)).c_str(), worst.max_relative_error,
                    worst.worst_coordinate.c_str(), ok ? "" : "  FAIL");
      log << buf;
      if (!ok && passed) {
        passed = false;
        first_failure = std::string(loss_selector_name(sel)) + " at h=" + round_trip(h) +
                        ": relative error " + round_trip(worst.max_relative_error) +
                        " at coordinate " + worst.worst_coordinate + " (fixture seed " +
                        std::to_string(seed + static_cast<std::uint64_t>(worst_fixture)) + ")";
      }
    }
    per_h["losses"] = losses;
    results.push_back(per_h);
  }

  const fs::path out = output_dir(config);
  Json report;
  report["passed"] = passed;
  report["results"] = results;
  write_text_file((out / "gradcheck.json").string(), report.dump(2) + "\n");
  Json m = manifest(config, {"gradcheck.json"});
  m["passed"] = passed;
  write_manifest(out, m);
  if (!passed) throw Error(ErrorKind::kGradientMismatch, first_failure);
  return m;
}

namespace {

// Deep merge of a user configuration into the defaults; unknown keys fail.
void merge(Json &base, const Json &over, const std::string &where) {
  if (!over.is_object()) invalid((where.empty() ? "config" : where) + ": expected an object");
  for (const auto &[key, value] : over.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) invalid(path + ": unknown key");
    if (key == "command") {
      if (value != base[key]) invalid("config is for command " + value.dump());
      continue;
    }
    if (base[key].is_object()) {
      merge(base[key], value, path);
    } else {
      base[key] = value;
    }
  }
}

Json parse_scalar(const std::string &raw, const Json &like, const std::string &flag) {
  auto bad = [&]() -> Json { invalid("--" + flag + ": cannot parse '" + raw + "'"); };
  if (like.is_boolean()) {
    if (raw == "true" || raw == "1") return true;
    if (raw == "false" || raw == "0") return false;
    return bad();
  }
  if (like.is_number_integer()) {
    long long v = 0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || p != raw.data() + raw.size()) return bad();
    return v;
  }
  if (like.is_number()) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || p != raw.data() + raw.size()) return bad();
    return v;
  }
  return raw;
}

Json parse_flag_value(const std::string &raw, const Json &like, const std::string &flag) {
  if (!like.is_array()) return parse_scalar(raw, like, flag);
  Json out = Json::array();
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_scalar(item, like.front(), flag));
  if (out.empty()) invalid("--" + flag + ": empty list");
  return out;
}

struct FlagSlot {
  std::vector<std::string> path;
  std::string flag;
  std::string value;
  bool switch_value = false;
  bool is_switch = false;
  CLI::Option *option = nullptr;
};

std::string hyphenate(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"relkit: visual relationship detection from visual and word-embedding scores"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  struct Command {
    CLI::App *app = nullptr;
    std::string config_path;
    std::vector<std::unique_ptr<FlagSlot>> slots;
  };
  std::map<std::string, Command> commands;
  const std::map<std::string, std::string> descriptions = {
      {"synth", "generate a synthetic corpus, embeddings and true parameters"},
      {"train", "train a model by alternating block descent"},
      {"eval", "evaluate recall@k (and optionally zero-shot, mAP, ablations)"},
      {"retrieve", "rank images by relationship descriptors"},
      {"gradcheck", "compare analytic and finite-difference gradients"}};

  for (std::string_view name : kCommands) {
    Command &cmd = commands[std::string(name)];
    cmd.app = app.add_subcommand(std::string(name), descriptions.at(std::string(name)));
    cmd.app->add_option("--config", cmd.config_path, "JSON configuration; flags override it");
    const Json defaults = default_config(name);
    auto add = [&](std::vector<std::string> path, const Json &like) {
      auto slot = std::make_unique<FlagSlot>();
      slot->path = std::move(path);
      slot->flag = hyphenate(slot->path.back());
      const std::string opt = "--" + slot->flag;
      if (slot->path.size() == 1 && like.is_boolean()) {
        slot->is_switch = true;
        slot->option = cmd.app->add_flag(opt, slot->switch_value);
      } else {
        std::string hint = like.is_array() ? "comma-separated list, default " : "default ";
        if (like.is_array()) {
          std::string items;
          for (const auto &x : like) items += (items.empty() ? "" : ",") + x.dump();
          hint += items;
        } else if (like.is_string() && like.get<std::string>().empty()) {
          hint = "no default";
        } else {
          hint += like.is_string() ? like.get<std::string>() : like.dump();
        }
        slot->option = cmd.app->add_option(opt, slot->value, hint);
      }
      cmd.slots.push_back(std::move(slot));
    };
    for (const auto &[key, value] : defaults.items()) {
      if (key == "command") continue;
      if (value.is_object()) {
        for (const auto &[inner, v] : value.items()) add({key, inner}, v);
      } else {
        add({key}, value);
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  for (auto &[name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      Json config = default_config(name);
      if (!cmd.config_path.empty()) merge(config, read_json_file(cmd.config_path), "");
      for (const auto &slot : cmd.slots) {
        if (slot->option->count() == 0) continue;
        Json *target = &config;
        for (const auto &key : slot->path) target = &(*target)[key];
        *target = slot->is_switch ? Json(slot->switch_value) : parse_flag_value(slot->value, *target, slot->flag);
      }
      if (name == "synth") cmd_synth(config, out);
      if (name == "train") cmd_train(config, out);
      if (name == "eval") cmd_eval(config, out);
      if (name == "retrieve") cmd_retrieve(config, out);
      if (name == "gradcheck") cmd_gradcheck(config, out);
      return 0;
    } catch (const Error &e) {
      err << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

}  // namespace relkit::cli
