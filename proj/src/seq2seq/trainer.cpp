#include "sawr/seq2seq/trainer.hpp"

#include <chrono>

namespace sawr::seq2seq {

double train_step(TranslationModel& model, const data::Batch& batch, Trainer& trainer) {
  if (batch.size() == 0) throw InvalidArgument("train_step: empty batch");
  Tape<double> tape;
  double loss_value = 0;
  {
    TapeScope<double> scope(tape);
    Tensord loss = model.batch_loss(batch, Mode::train, trainer.dropout_rng);
    loss_value = loss.item();
    tape.backward(loss);
  }
  auto frozen = model.frozen_names();
  clip_gradients(model.params(), trainer.config.clip);
  adam_step(model.params(), trainer.adam, trainer.config.learning_rate, frozen);
  model.params().zero_grads();
  return loss_value;
}

void fit(TranslationModel& model, const std::vector<data::Batch>& batches, Trainer& trainer,
         const std::function<bool(const EpochReport&)>& on_epoch) {
  if (batches.empty()) throw InvalidArgument("fit: no batches");
  for (int epoch = 1; epoch <= trainer.config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    double total = 0;
    for (const auto& b : batches) total += train_step(model, b, trainer);
    EpochReport report{epoch, total / static_cast<double>(batches.size()),
                       std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    if (on_epoch && !on_epoch(report)) break;
  }
}

}  // namespace sawr::seq2seq
