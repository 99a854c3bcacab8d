#ifndef RELKIT_EXPERIMENT_H_
#define RELKIT_EXPERIMENT_H_

#include <string>
#include <vector>

#include "relkit/eval.h"
#include "relkit/training.h"

namespace relkit {

// A training recipe plus the score used at test time.
struct ModelVariant {
  std::string name;
  TrainingConfig training;
  ScoreMode score_mode = ScoreMode::kJoint;
};

// V only (C with f fixed, scored by V), L only (lambda1 L, scored by f),
// V + L (full objective without K) and V + L + K.
std::vector<ModelVariant> ablation_variants(const TrainingConfig &base);

struct EvalRequest {
  EvalOptions options;
  std::vector<EvalMode> modes = {std::begin(kAllEvalModes), std::end(kAllEvalModes)};
  bool zero_shot = false;  // also report GT restricted to triples unseen in train
  bool mean_ap = false;
};

struct EvalTables {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> zero_shot_rows;  // empty unless requested
};

// Appends one row (and one zero-shot row when requested) for a model.
// `train` is only read for zero-shot filtering and may be null otherwise.
void evaluate_into(EvalTables &tables, const std::string &name, const ModelParams &params,
                   const VocabEmbeddings &emb, const Corpus *train, const Corpus &test,
                   const EvalRequest &request, ScoreMode score_mode);

struct AblationRun {
  std::vector<ModelVariant> variants;
  std::vector<TrainResult> trained;  // parallel to variants
  EvalTables tables;
};

AblationRun run_ablation(const Corpus &train, const Corpus &test, const VocabEmbeddings &emb,
                         const TrainingConfig &base, const EvalRequest &request);

// Text form of both tables; the zero-shot table follows when present.
std::string format_tables(const EvalTables &tables);
std::string tables_to_json(const EvalTables &tables);

}  // namespace relkit

#endif  // RELKIT_EXPERIMENT_H_
