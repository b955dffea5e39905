#ifndef LSIC_PIPELINE_HPP_
#define LSIC_PIPELINE_HPP_

#include "lsic/adversarial.hpp"
#include "lsic/checkpoint.hpp"
#include "lsic/config.hpp"
#include "lsic/eval.hpp"
#include "lsic/synthetic.hpp"

#include <memory>
#include <optional>

namespace lsic {

struct DataBundle {
  RatingDataset dataset;
  DataSplit split;
  SessionizedDataset sessions;
  TrainIndex index;
  ContentFeatures content;
  bool has_content = false;
};

// Parse (or generate) + label + split + sessionize per the run config.
DataBundle prepare_data_from_source(const RunConfig& cfg);
// Same, but from ingest artifacts under cfg.out_dir.
DataBundle prepare_data_from_artifacts(const RunConfig& cfg);
// In-memory variant (dataset already labeled).
DataBundle bundle_dataset(RatingDataset ds, const SplitSpec& spec,
                          const ContentFeatures* content, std::uint64_t seed);

ScorerConfig scorer_config_from(const RunConfig& cfg, const DataBundle& data);
AdvConfig adv_config_from(const RunConfig& cfg);

// Writes dataset.tsv, id maps, the split manifest and a summary table.
void run_ingest(const RunConfig& cfg, std::ostream& out);

struct TrainOutput {
  FactorStore mf;
  std::unique_ptr<ScorerModel> generator;
  std::unique_ptr<ScorerModel> discriminator;
  TrainerState state;
  std::vector<MfEpochLog> mf_log;
  std::vector<real> g_pretrain_loss;
  std::vector<real> d_pretrain_loss;
};

// MF pretrain -> pairwise pretrain (G and D) -> adversarial phase. When
// `out_dir` is non-empty, writes per-epoch checkpoints, best.ckpt and
// learning_curve.csv there; `resume` continues from the newest epoch
// checkpoint instead of pretraining again.
TrainOutput run_training(const DataBundle& data, const RunConfig& cfg,
                         bool resume, std::ostream* log);

// Rebuild models from a checkpoint produced by run_training.
TrainOutput restore_models(const Checkpoint& ck, const DataBundle& data,
                           const RunConfig& cfg);

struct EvalOutput {
  MetricReport mixture;
  MetricReport mf_only;
};

// Test-set metrics for the generator and the MF-only baseline under the same
// protocol (states rolled through the end of training).
EvalOutput evaluate_test(const DataBundle& data, ScorerModel& generator,
                         const FactorStore& mf, const RunConfig& cfg,
                         bool content_enabled);

// Candidate-scale sweep on a trained generator; one CSV row per N.
std::string sweep_candidates_csv(const DataBundle& data, ScorerModel& generator,
                                 const FactorStore& mf, const RunConfig& cfg,
                                 const std::vector<int>& ns);

// Session-period sweep: retrains the full pipeline per period (fixed seed)
// and reports MF-only vs mixture test metrics.
std::string sweep_sessions_csv(const RunConfig& base,
                               const std::vector<int>& periods,
                               std::ostream* log);

// Checkpoint helpers shared by the CLI and tests.
std::string newest_epoch_checkpoint(const std::string& dir);
Checkpoint make_train_checkpoint(const TrainOutput& models,
                                 const DataBundle& data, const RunConfig& cfg,
                                 const std::string& rng_state);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lsic

#endif  // LSIC_PIPELINE_HPP_
