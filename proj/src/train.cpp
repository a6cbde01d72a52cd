#include <stdexcept>

#include "epiplan/neural.hpp"

namespace epiplan {

TrainResult train(RegressorModel &model, const TrainingSet &data,
                  const TrainConfig &cfg, const AdamWConfig &opt) {
  if (data.graphs.empty())
    throw std::invalid_argument("train: empty dataset");
  if (data.graphs.size() != data.targets.size())
    throw std::invalid_argument("train: graphs/targets size mismatch");

  OptimizerState state = make_optimizer_state(model);
  Rng rng(cfg.seed);
  const std::size_t n = data.graphs.size();
  const std::size_t batch_size = std::max<std::uint32_t>(cfg.batch_size, 1);

  TrainResult result;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::uint32_t> order =
        rng.permutation(static_cast<std::uint32_t>(n));
    double squared_error = 0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      std::vector<const StateGraph *> graphs;
      std::vector<double> targets;
      for (std::size_t i = start; i < end; ++i) {
        graphs.push_back(&data.graphs[order[i]]);
        targets.push_back(data.targets[order[i]]);
      }
      Batch batch = make_batch(graphs);
      ForwardCache cache;
      std::vector<double> preds = forward(model, batch, cache, rng);
      squared_error += mse_loss(preds, targets) * preds.size();
      zero_grads(model);
      backward(model, batch, cache, preds, targets);
      adamw_step(model, state, opt);
    }
    result.epoch_mse.push_back(squared_error / n);
  }
  return result;
}

} // namespace epiplan
