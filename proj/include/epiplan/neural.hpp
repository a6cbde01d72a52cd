#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/graph_embed.hpp"
#include "epiplan/rng.hpp"

namespace epiplan {

/// Row-major dense matrix; the only tensor shape the regressor needs.
struct Mat {
  std::uint32_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::uint32_t r, std::uint32_t c)
      : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double &at(std::uint32_t r, std::uint32_t c) {
    return a[static_cast<std::size_t>(r) * cols + c];
  }
  double at(std::uint32_t r, std::uint32_t c) const {
    return a[static_cast<std::size_t>(r) * cols + c];
  }
};

/// Named trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  void init(std::string n, std::vector<std::uint32_t> s) {
    name = std::move(n);
    shape = std::move(s);
    std::size_t count = 1;
    for (std::uint32_t d : shape)
      count *= d;
    value.assign(count, 0.0);
    grad.assign(count, 0.0);
  }
};

/// y = W x + b with W stored out-major. Weights init U(+-1/sqrt(fan_in)),
/// biases zero.
struct Dense {
  std::uint32_t in = 0, out = 0;
  Param w, b;

  void init(const std::string &name, std::uint32_t fan_in,
            std::uint32_t fan_out, Rng &rng);
  Mat forward(const Mat &x) const;
  // accumulates into w.grad/b.grad, returns dL/dx
  Mat backward(const Mat &dy, const Mat &x_cache);
};

/// Two dense layers with a rectifier between them.
struct Mlp {
  Dense l1, l2;

  struct Cache {
    Mat x, pre, hidden;
  };

  void init(const std::string &name, std::uint32_t in, std::uint32_t hidden,
            std::uint32_t out, Rng &rng);
  Mat forward(const Mat &x, Cache &cache) const;
  Mat backward(const Mat &dy, Cache &cache);
};

/// Per-feature batch normalization. Training mode normalizes with batch
/// statistics (population variance) and folds them into the running
/// estimates with the same biased variance; eval mode normalizes with the
/// running estimates, so batch-size-1 inference never touches them.
struct BatchNorm {
  std::uint32_t dim = 0;
  Param gamma, beta;
  std::vector<double> running_mean, running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  struct Cache {
    bool batch_mode = false;
    Mat x_hat;
    std::vector<double> inv_std; // per feature
  };

  void init(const std::string &name, std::uint32_t width);
  // batch_stats selects training-style normalization; never mutates
  Mat forward(const Mat &x, Cache &cache, bool batch_stats) const;
  // folds the batch statistics of x into the running estimates
  void update_running(const Mat &x);
  Mat backward(const Mat &dy, const Cache &cache);
};

/// Inverted dropout: kept activations are scaled by 1/(1-p) during
/// training; disabled (identity) when no rng is supplied.
struct Dropout {
  double p = 0.2;

  struct Cache {
    Mat mask; // empty means identity
  };

  Mat forward(const Mat &x, Cache &cache, Rng *rng) const;
  Mat backward(const Mat &dy, const Cache &cache) const;
};

/// Edge-aware message passing:
///   h'_v = InnerMlp((1+eps) h_v + sum over incoming edges u->v of
///                   relu(h_u + project(e_uv)))
/// The per-layer projection lifts edge embeddings to the node width so the
/// sum is well-typed; the sum runs in edge-array order.
struct GineLayer {
  double epsilon = 0.0;
  Dense edge_proj;
  Mlp inner;

  struct Cache {
    Mat h, edge_input, projected, message_pre, aggregated_in;
    Mlp::Cache inner_cache;
  };

  void init(const std::string &name, std::uint32_t node_width,
            std::uint32_t edge_width, std::uint32_t out_width, Rng &rng);
  Mat forward(const Mat &node_feats, const Mat &edge_emb,
              const std::vector<std::uint32_t> &edge_src,
              const std::vector<std::uint32_t> &edge_dst, Cache &cache) const;
  // returns dL/d(node_feats); accumulates layer grads and writes
  // dL/d(edge_emb) into d_edge_emb
  Mat backward(const Mat &dy, const std::vector<std::uint32_t> &edge_src,
               const std::vector<std::uint32_t> &edge_dst, Cache &cache,
               Mat &d_edge_emb);
};

/// Dense -> BN -> ReLU -> Dropout -> Dense -> BN, identity skip, ReLU.
struct ResidualBlock {
  Dense d1, d2;
  BatchNorm bn1, bn2;
  Dropout drop;

  struct Cache {
    Mat x, u1, r1, dropped, u2, sum_pre;
    BatchNorm::Cache bn1_cache, bn2_cache;
    Dropout::Cache drop_cache;
    Mat bn1_out, bn2_out;
  };

  void init(const std::string &name, std::uint32_t width, Rng &rng);
  Mat forward(const Mat &x, Cache &cache, bool batch_stats, Rng *dropout_rng) const;
  void update_running(const Cache &cache);
  Mat backward(const Mat &dy, Cache &cache);
};

/// Distance normalization and dataset balancing knobs.
struct PrepConfig {
  std::uint32_t d_max = 50;
  double min_val = 1e-3;
  double max_val = 1.0 - 1e-3;
  double p_m = 0.5; // max fraction of the set any distance bin may hold
};

/// d -> alpha d + beta with alpha = (max_val - min_val)/d_max, beta =
/// min_val. Throws std::out_of_range when d > d_max.
double normalize_distance(std::uint32_t d, const PrepConfig &cfg);
double denormalize_distance(double nd, const PrepConfig &cfg);

struct ModelDims {
  std::uint32_t node_emb = 64;
  std::uint32_t edge_emb = 32;
  std::uint32_t hidden = 128;
  std::uint32_t blocks = 3;
};

/// The full distance regressor: scalar-ID and edge-attribute embedding
/// MLPs, two message-passing layers with rectifiers, global mean pooling,
/// and a residual regression head ending in sigmoid + clamp.
struct RegressorModel {
  ModelDims dims;
  PrepConfig prep;
  Mlp id_mlp, edge_mlp;
  GineLayer gine1, gine2;
  Dense head_in;
  std::vector<ResidualBlock> blocks;
  Dense head_out;

  std::vector<Param *> parameters();
  std::vector<const Param *> parameters() const;
  // named non-trainable state (batch-norm running estimates)
  std::vector<std::pair<std::string, std::vector<double> *>> buffers();
  std::vector<std::pair<std::string, const std::vector<double> *>>
  buffers() const;
};

RegressorModel make_model(std::uint64_t seed, const ModelDims &dims = {},
                          const PrepConfig &prep = {});

/// Concatenated feature arrays of one or more StateGraphs.
struct Batch {
  std::vector<double> node_ids;          // normalized to [0,1], one per node
  std::vector<std::uint32_t> edge_src;   // global node indices
  std::vector<std::uint32_t> edge_dst;
  std::vector<double> edge_attr;         // normalized labels, one per edge
  std::vector<std::uint32_t> node_graph; // node -> graph index
  std::uint32_t graph_count = 0;
};

Batch make_batch(const std::vector<const StateGraph *> &graphs);
Batch make_batch(const StateGraph &graph);

/// Everything backward needs from the forward pass.
struct ForwardCache {
  Mlp::Cache id_cache, edge_cache;
  GineLayer::Cache gine1_cache, gine2_cache;
  Mat conv1_pre, conv2_pre; // pre-rectifier message-passing outputs
  Mat pooled;
  std::vector<std::uint32_t> graph_sizes;
  Mat head_pre;
  std::vector<ResidualBlock::Cache> block_caches;
  Mat z;                   // pre-sigmoid head output, one row per graph
  std::vector<double> sig; // sigmoid(z) before clamping
};

/// Shared forward pass. `dropout_rng` null disables dropout; `batch_stats`
/// selects batch-vs-running normalization. Const on the model, so eval-mode
/// calls are safe from concurrent searches.
std::vector<double> forward_pass(const RegressorModel &model,
                                 const Batch &batch, ForwardCache &cache,
                                 Rng *dropout_rng, bool batch_stats);

/// Training-mode forward: dropout active, batch statistics used and folded
/// into the running estimates.
std::vector<double> forward(RegressorModel &model, const Batch &batch,
                            ForwardCache &cache, Rng &rng);

/// Eval-mode predictions (no dropout, running statistics, no side effects).
std::vector<double> predict(const RegressorModel &model, const Batch &batch);

double mse_loss(const std::vector<double> &pred,
                const std::vector<double> &target);

void zero_grads(RegressorModel &model);

/// Exact reverse-mode gradients of mse_loss(forward(...), targets),
/// accumulated into each Param::grad. Must be called with the cache and
/// predictions of the immediately preceding forward pass.
void backward(RegressorModel &model, const Batch &batch, ForwardCache &cache,
              const std::vector<double> &predictions,
              const std::vector<double> &targets);

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m, v; // per parameter, same shapes
};

OptimizerState make_optimizer_state(const RegressorModel &model);

/// Decoupled-weight-decay update:
///   w <- w - lr wd w - lr m_hat / (sqrt(v_hat) + eps)
/// with bias-corrected moments; applied to every parameter.
void adamw_step(RegressorModel &model, OptimizerState &state,
                const AdamWConfig &cfg = {});

/// Balanced, normalized training set. `raw_distances` keeps the original
/// integer labels alongside the normalized targets.
struct TrainingSet {
  std::vector<StateGraph> graphs;
  std::vector<double> targets;
  std::vector<std::uint32_t> raw_distances;
};

/// Three-step preparation: drop unlabeled (unreachable) samples, cap each
/// distance bin to at most floor(p_m * total) by seeded random subsampling
/// (iterated to a fixed point; skipped when only one bin exists, where the
/// cap is unsatisfiable), then normalize targets. Distances above d_max are
/// clamped to d_max before binning. Throws std::invalid_argument when
/// nothing remains.
TrainingSet prepare_dataset(const std::vector<DatasetRecord> &records,
                            const PrepConfig &cfg, std::uint64_t seed);

struct TrainConfig {
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_mse; // training-mode MSE per epoch
};

/// Deterministic minibatch training with AdamW. Shuffling, dropout, and
/// initialization all derive from the configured seeds.
TrainResult train(RegressorModel &model, const TrainingSet &data,
                  const TrainConfig &cfg, const AdamWConfig &opt = {});

/// Versioned JSON model container; round-trips every parameter, buffer,
/// and config bit-exactly. Throws std::runtime_error on version mismatch,
/// shape mismatch, or corrupt files.
void save_model(const RegressorModel &model, const std::string &path);
RegressorModel load_model(const std::string &path);

} // namespace epiplan
