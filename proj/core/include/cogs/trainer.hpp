// trainer.hpp - alternating adversarial optimization of the assembled model:
// a discriminator step on detached generations, then a generator step on the
// weighted four-term objective, with per-epoch checkpoints and a loss CSV.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cogs/corpus.hpp"
#include "cogs/losses.hpp"
#include "cogs/model.hpp"

namespace cogs {

struct TrainingConfig {
    LossWeights weights;        // alpha, beta, gamma, lambda
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::int64_t epochs = 1;
    std::int64_t batch_size = 8;
    std::int64_t window = 34;   // pose frames per training clip
    std::int64_t stride = 10;   // ingest stride for longer recordings
    double fps = 15.0;
    std::uint64_t seed = 1;
    bool teacher_forcing = true;
    double style_margin = 1.0;
    double huber_delta = 1.0;

    void validate() const;
};

/// One row per optimizer step (a discriminator update plus a generator
/// update); the CSV mirrors these fields.
struct StepRecord {
    std::int64_t step = 0;   // 1-based, cumulative across epochs
    std::int64_t epoch = 0;  // 1-based
    double huber = 0.0;
    double style = 0.0;
    double kld = 0.0;
    double gan_g = 0.0;
    double gan_d = 0.0;
    double total = 0.0;
};

struct TrainResult {
    std::vector<StepRecord> history;        // rows produced by this call
    std::vector<std::string> checkpoints;   // per-epoch manifest paths
    std::string final_checkpoint;
    std::string loss_csv;
};

/// Fixed-window ingest: records already `frames` long pass through; longer
/// ones are sliced into windows with the given stride; shorter ones are
/// rejected.
std::vector<ClipRecord> ingest_clips(const std::vector<ClipRecord>& records, std::int64_t frames,
                                     std::int64_t stride);

/// Serializes the loss history as CSV with header
/// step,epoch,huber,style,kld,gan_g,gan_d,total.
void write_loss_csv(const std::string& path, const std::vector<StepRecord>& rows);
std::vector<StepRecord> read_loss_csv(const std::string& path);

/// Runs cfg.epochs of alternating optimization over the corpus, writing
/// epoch_NNNN.json checkpoints (weights + optimizer state + rng position)
/// and loss_history.csv under checkpoint_dir. With resume_from set, restores
/// that checkpoint and continues; the combined history matches an unbroken
/// run exactly. extra_meta is merged into every checkpoint manifest.
TrainResult train_model(Model& model, const TrainingConfig& cfg,
                        const std::vector<ClipRecord>& corpus, const std::string& checkpoint_dir,
                        const std::string& resume_from = "",
                        const std::map<std::string, std::string>& extra_meta = {});

}  // namespace cogs
