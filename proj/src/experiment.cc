#include "relkit/experiment.h"

#include "json.hpp"
#include "relkit/error.h"

namespace relkit {

std::vector<ModelVariant> ablation_variants(const TrainingConfig &base) {
  std::vector<ModelVariant> out;
  ModelVariant v{"V only", base, ScoreMode::kVisualOnly};
  v.training.variant = TrainVariant::kVisualOnly;
  out.push_back(v);
  ModelVariant l{"L only", base, ScoreMode::kLanguageOnly};
  l.training.variant = TrainVariant::kLanguageOnly;
  out.push_back(l);
  ModelVariant vl{"V + L", base, ScoreMode::kJoint};
  vl.training.variant = TrainVariant::kFull;
  vl.training.lambda2 = 0.0;
  out.push_back(vl);
  ModelVariant full{"V + L + K", base, ScoreMode::kJoint};
  full.training.variant = TrainVariant::kFull;
  out.push_back(full);
  return out;
}

void evaluate_into(EvalTables &tables, const std::string &name, const ModelParams &params,
                   const VocabEmbeddings &emb, const Corpus *train, const Corpus &test,
                   const EvalRequest &request, ScoreMode score_mode) {
  EvalOptions options = request.options;
  options.score_mode = score_mode;
  ResultRow row{name, {}};
  ResultRow zs{name, {}};
  std::set<Triple> unseen;
  if (request.zero_shot) {
    if (train == nullptr) throw Error(ErrorKind::kInvalidArgument, "zero-shot evaluation needs a training corpus");
    unseen = zero_shot_triples(*train, test);
  }
  for (EvalMode mode : request.modes) {
    EvalReport report = evaluate(params, emb, test, mode, options);
    if (request.mean_ap) report.mean_ap = mean_average_precision(params, emb, test, mode, options);
    row.reports.push_back(std::move(report));
    if (request.zero_shot) {
      EvalReport z = evaluate_zero_shot(params, emb, *train, test, mode, options);
      if (request.mean_ap) z.mean_ap = mean_average_precision(params, emb, test, mode, options, &unseen);
      zs.reports.push_back(std::move(z));
    }
  }
  tables.rows.push_back(std::move(row));
  if (request.zero_shot) tables.zero_shot_rows.push_back(std::move(zs));
}

AblationRun run_ablation(const Corpus &train, const Corpus &test, const VocabEmbeddings &emb,
                         const TrainingConfig &base, const EvalRequest &request) {
  AblationRun run;
  run.variants = ablation_variants(base);
  for (const auto &variant : run.variants) {
    run.trained.push_back(relkit::train(train, emb, variant.training));
    evaluate_into(run.tables, variant.name, run.trained.back().params, emb, &train, test, request,
                  variant.score_mode);
  }
  return run;
}

std::string format_tables(const EvalTables &tables) {
  std::string out = format_results_table(tables.rows);
  if (!tables.zero_shot_rows.empty()) {
    out += "\nzero-shot\n" + format_results_table(tables.zero_shot_rows);
  }
  return out;
}

std::string tables_to_json(const EvalTables &tables) {
  nlohmann::ordered_json j;
  j["results"] = nlohmann::ordered_json::parse(results_to_json(tables.rows));
  if (!tables.zero_shot_rows.empty()) {
    j["zero_shot"] = nlohmann::ordered_json::parse(results_to_json(tables.zero_shot_rows));
  }
  return j.dump(2) + "\n";
}

}  // namespace relkit
