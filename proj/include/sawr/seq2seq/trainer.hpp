#pragma once

#include <functional>
#include <vector>

#include "sawr/data/batch.hpp"
#include "sawr/nn/optim.hpp"
#include "sawr/seq2seq/model.hpp"

namespace sawr::seq2seq {

struct TrainConfig {
  double learning_rate = 5e-4;
  double clip = 5.0;
  int epochs = 10;
};

/// Optimizer and dropout state carried across steps.
struct Trainer {
  TrainConfig config;
  AdamState<double> adam;
  Rng dropout_rng;

  explicit Trainer(TrainConfig c, std::uint64_t seed = 1) : config(c), dropout_rng(Rng::derive(seed, 0xD50)) {}
};

/// One teacher-forced update: loss, backward, clip, Adam (frozen parser
/// parameters excluded). Returns the mean per-token NLL before the update.
double train_step(TranslationModel& model, const data::Batch& batch, Trainer& trainer);

struct EpochReport {
  int epoch = 0;
  double mean_loss = 0;
  double seconds = 0;
};

/// Runs config.epochs passes over `batches` in order. `on_epoch` may
/// return false to stop early.
void fit(TranslationModel& model, const std::vector<data::Batch>& batches, Trainer& trainer,
         const std::function<bool(const EpochReport&)>& on_epoch = {});

}  // namespace sawr::seq2seq
