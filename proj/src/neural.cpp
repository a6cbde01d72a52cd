#include "epiplan/neural.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace epiplan {
namespace {

Mat relu(const Mat &x) {
  Mat y = x;
  for (double &v : y.a)
    v = v > 0 ? v : 0;
  return y;
}

// dL/d(pre) given dL/d(relu(pre))
Mat relu_backward(const Mat &dy, const Mat &pre) {
  Mat dx = dy;
  for (std::size_t i = 0; i < dx.a.size(); ++i)
    if (pre.a[i] <= 0)
      dx.a[i] = 0;
  return dx;
}

void check_shape(bool ok, const char *what) {
  if (!ok)
    throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

} // namespace

void Dense::init(const std::string &name, std::uint32_t fan_in,
                 std::uint32_t fan_out, Rng &rng) {
  in = fan_in;
  out = fan_out;
  w.init(name + ".w", {fan_out, fan_in});
  b.init(name + ".b", {fan_out});
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double &v : w.value)
    v = rng.range(-bound, bound);
}

Mat Dense::forward(const Mat &x) const {
  check_shape(x.cols == in, "dense input width");
  Mat y(x.rows, out);
  for (std::uint32_t r = 0; r < x.rows; ++r)
    for (std::uint32_t o = 0; o < out; ++o) {
      double acc = b.value[o];
      const double *wrow = &w.value[static_cast<std::size_t>(o) * in];
      for (std::uint32_t i = 0; i < in; ++i)
        acc += wrow[i] * x.at(r, i);
      y.at(r, o) = acc;
    }
  return y;
}

Mat Dense::backward(const Mat &dy, const Mat &x_cache) {
  check_shape(dy.cols == out && dy.rows == x_cache.rows, "dense backward");
  Mat dx(x_cache.rows, in);
  for (std::uint32_t r = 0; r < dy.rows; ++r)
    for (std::uint32_t o = 0; o < out; ++o) {
      const double g = dy.at(r, o);
      b.grad[o] += g;
      double *wgrad = &w.grad[static_cast<std::size_t>(o) * in];
      const double *wrow = &w.value[static_cast<std::size_t>(o) * in];
      for (std::uint32_t i = 0; i < in; ++i) {
        wgrad[i] += g * x_cache.at(r, i);
        dx.at(r, i) += g * wrow[i];
      }
    }
  return dx;
}

void Mlp::init(const std::string &name, std::uint32_t in, std::uint32_t hidden,
               std::uint32_t out, Rng &rng) {
  l1.init(name + ".l1", in, hidden, rng);
  l2.init(name + ".l2", hidden, out, rng);
}

Mat Mlp::forward(const Mat &x, Cache &cache) const {
  cache.x = x;
  cache.pre = l1.forward(x);
  cache.hidden = relu(cache.pre);
  return l2.forward(cache.hidden);
}

Mat Mlp::backward(const Mat &dy, Cache &cache) {
  Mat dh = l2.backward(dy, cache.hidden);
  Mat dpre = relu_backward(dh, cache.pre);
  return l1.backward(dpre, cache.x);
}

void BatchNorm::init(const std::string &name, std::uint32_t width) {
  dim = width;
  gamma.init(name + ".gamma", {width});
  beta.init(name + ".beta", {width});
  std::fill(gamma.value.begin(), gamma.value.end(), 1.0);
  running_mean.assign(width, 0.0);
  running_var.assign(width, 1.0);
}

Mat BatchNorm::forward(const Mat &x, Cache &cache, bool batch_stats) const {
  check_shape(x.cols == dim, "batchnorm width");
  cache.batch_mode = batch_stats;
  cache.x_hat = Mat(x.rows, dim);
  cache.inv_std.assign(dim, 0.0);
  Mat y(x.rows, dim);
  for (std::uint32_t j = 0; j < dim; ++j) {
    double mean, var;
    if (batch_stats) {
      double sum = 0;
      for (std::uint32_t r = 0; r < x.rows; ++r)
        sum += x.at(r, j);
      mean = sum / x.rows;
      double sq = 0;
      for (std::uint32_t r = 0; r < x.rows; ++r) {
        double d = x.at(r, j) - mean;
        sq += d * d;
      }
      var = sq / x.rows; // population variance
    } else {
      mean = running_mean[j];
      var = running_var[j];
    }
    const double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[j] = inv;
    for (std::uint32_t r = 0; r < x.rows; ++r) {
      double xh = (x.at(r, j) - mean) * inv;
      cache.x_hat.at(r, j) = xh;
      y.at(r, j) = gamma.value[j] * xh + beta.value[j];
    }
  }
  return y;
}

void BatchNorm::update_running(const Mat &x) {
  for (std::uint32_t j = 0; j < dim; ++j) {
    double sum = 0;
    for (std::uint32_t r = 0; r < x.rows; ++r)
      sum += x.at(r, j);
    const double mean = sum / x.rows;
    double sq = 0;
    for (std::uint32_t r = 0; r < x.rows; ++r) {
      double d = x.at(r, j) - mean;
      sq += d * d;
    }
    const double var = sq / x.rows;
    running_mean[j] = (1 - momentum) * running_mean[j] + momentum * mean;
    running_var[j] = (1 - momentum) * running_var[j] + momentum * var;
  }
}

Mat BatchNorm::backward(const Mat &dy, const Cache &cache) {
  const std::uint32_t n = dy.rows;
  Mat dx(n, dim);
  for (std::uint32_t j = 0; j < dim; ++j) {
    double sum_dy = 0, sum_dy_xhat = 0;
    for (std::uint32_t r = 0; r < n; ++r) {
      const double g = dy.at(r, j);
      sum_dy += g;
      sum_dy_xhat += g * cache.x_hat.at(r, j);
    }
    gamma.grad[j] += sum_dy_xhat;
    beta.grad[j] += sum_dy;
    const double inv = cache.inv_std[j];
    const double gm = gamma.value[j];
    if (cache.batch_mode) {
      // mean/variance depend on the batch; standard coupled gradient
      for (std::uint32_t r = 0; r < n; ++r) {
        const double dxh = dy.at(r, j) * gm;
        dx.at(r, j) = inv / n *
                      (n * dxh - sum_dy * gm -
                       cache.x_hat.at(r, j) * sum_dy_xhat * gm);
      }
    } else {
      // running statistics are constants
      for (std::uint32_t r = 0; r < n; ++r)
        dx.at(r, j) = dy.at(r, j) * gm * inv;
    }
  }
  return dx;
}

Mat Dropout::forward(const Mat &x, Cache &cache, Rng *rng) const {
  if (rng == nullptr || p <= 0) {
    cache.mask = Mat();
    return x;
  }
  cache.mask = Mat(x.rows, x.cols);
  const double keep_scale = 1.0 / (1.0 - p);
  Mat y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    const double m = rng->unit() < p ? 0.0 : keep_scale;
    cache.mask.a[i] = m;
    y.a[i] = x.a[i] * m;
  }
  return y;
}

Mat Dropout::backward(const Mat &dy, const Cache &cache) const {
  if (cache.mask.a.empty())
    return dy;
  Mat dx = dy;
  for (std::size_t i = 0; i < dx.a.size(); ++i)
    dx.a[i] *= cache.mask.a[i];
  return dx;
}

void GineLayer::init(const std::string &name, std::uint32_t node_width,
                     std::uint32_t edge_width, std::uint32_t out_width,
                     Rng &rng) {
  epsilon = 0.0;
  edge_proj.init(name + ".edge_proj", edge_width, node_width, rng);
  inner.init(name + ".inner", node_width, out_width, out_width, rng);
}

Mat GineLayer::forward(const Mat &node_feats, const Mat &edge_emb,
                       const std::vector<std::uint32_t> &edge_src,
                       const std::vector<std::uint32_t> &edge_dst,
                       Cache &cache) const {
  check_shape(edge_emb.rows == edge_src.size() &&
                  edge_src.size() == edge_dst.size(),
              "gine edge arrays");
  const std::uint32_t n = node_feats.rows;
  const std::uint32_t d = node_feats.cols;
  cache.h = node_feats;
  cache.edge_input = edge_emb;
  cache.projected = edge_proj.forward(edge_emb); // m x d
  cache.message_pre = Mat(cache.projected.rows, d);
  cache.aggregated_in = Mat(n, d);
  for (std::uint32_t k = 0; k < cache.projected.rows; ++k) {
    const std::uint32_t u = edge_src[k], v = edge_dst[k];
    for (std::uint32_t c = 0; c < d; ++c) {
      const double pre = node_feats.at(u, c) + cache.projected.at(k, c);
      cache.message_pre.at(k, c) = pre;
      if (pre > 0)
        cache.aggregated_in.at(v, c) += pre;
    }
  }
  Mat u_mat(n, d);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < d; ++c)
      u_mat.at(r, c) =
          (1.0 + epsilon) * node_feats.at(r, c) + cache.aggregated_in.at(r, c);
  return inner.forward(u_mat, cache.inner_cache);
}

Mat GineLayer::backward(const Mat &dy,
                        const std::vector<std::uint32_t> &edge_src,
                        const std::vector<std::uint32_t> &edge_dst,
                        Cache &cache, Mat &d_edge_emb) {
  Mat du = inner.backward(dy, cache.inner_cache);
  const std::uint32_t d = du.cols;
  Mat dh = du;
  for (double &v : dh.a)
    v *= (1.0 + epsilon);
  Mat dmsg(cache.message_pre.rows, d);
  for (std::uint32_t k = 0; k < cache.message_pre.rows; ++k) {
    const std::uint32_t u = edge_src[k], v = edge_dst[k];
    for (std::uint32_t c = 0; c < d; ++c) {
      if (cache.message_pre.at(k, c) > 0) {
        const double g = du.at(v, c);
        dmsg.at(k, c) = g;
        dh.at(u, c) += g;
      }
    }
  }
  d_edge_emb = edge_proj.backward(dmsg, cache.edge_input);
  return dh;
}

void ResidualBlock::init(const std::string &name, std::uint32_t width,
                         Rng &rng) {
  d1.init(name + ".d1", width, width, rng);
  bn1.init(name + ".bn1", width);
  d2.init(name + ".d2", width, width, rng);
  bn2.init(name + ".bn2", width);
}

Mat ResidualBlock::forward(const Mat &x, Cache &cache, bool batch_stats,
                           Rng *dropout_rng) const {
  cache.x = x;
  cache.u1 = d1.forward(x);
  cache.bn1_out = bn1.forward(cache.u1, cache.bn1_cache, batch_stats);
  cache.r1 = relu(cache.bn1_out);
  cache.dropped = drop.forward(cache.r1, cache.drop_cache, dropout_rng);
  cache.u2 = d2.forward(cache.dropped);
  cache.bn2_out = bn2.forward(cache.u2, cache.bn2_cache, batch_stats);
  cache.sum_pre = cache.bn2_out;
  for (std::size_t i = 0; i < cache.sum_pre.a.size(); ++i)
    cache.sum_pre.a[i] += x.a[i];
  return relu(cache.sum_pre);
}

void ResidualBlock::update_running(const Cache &cache) {
  bn1.update_running(cache.u1);
  bn2.update_running(cache.u2);
}

Mat ResidualBlock::backward(const Mat &dy, Cache &cache) {
  Mat dsum = relu_backward(dy, cache.sum_pre);
  Mat db2 = bn2.backward(dsum, cache.bn2_cache);
  Mat ddrop = d2.backward(db2, cache.dropped);
  Mat dr1 = drop.backward(ddrop, cache.drop_cache);
  Mat dbn1 = relu_backward(dr1, cache.bn1_out);
  Mat du1 = bn1.backward(dbn1, cache.bn1_cache);
  Mat dx = d1.backward(du1, cache.x);
  for (std::size_t i = 0; i < dx.a.size(); ++i)
    dx.a[i] += dsum.a[i]; // identity skip
  return dx;
}

double normalize_distance(std::uint32_t d, const PrepConfig &cfg) {
  if (d > cfg.d_max)
    throw std::out_of_range("normalize_distance: d exceeds d_max");
  const double alpha = (cfg.max_val - cfg.min_val) / cfg.d_max;
  return alpha * d + cfg.min_val;
}

double denormalize_distance(double nd, const PrepConfig &cfg) {
  const double alpha = (cfg.max_val - cfg.min_val) / cfg.d_max;
  return (nd - cfg.min_val) / alpha;
}

std::vector<Param *> RegressorModel::parameters() {
  std::vector<Param *> out = {&id_mlp.l1.w,    &id_mlp.l1.b,   &id_mlp.l2.w,
                              &id_mlp.l2.b,    &edge_mlp.l1.w, &edge_mlp.l1.b,
                              &edge_mlp.l2.w,  &edge_mlp.l2.b};
  for (GineLayer *g : {&gine1, &gine2}) {
    out.push_back(&g->edge_proj.w);
    out.push_back(&g->edge_proj.b);
    out.push_back(&g->inner.l1.w);
    out.push_back(&g->inner.l1.b);
    out.push_back(&g->inner.l2.w);
    out.push_back(&g->inner.l2.b);
  }
  out.push_back(&head_in.w);
  out.push_back(&head_in.b);
  for (ResidualBlock &blk : blocks) {
    out.push_back(&blk.d1.w);
    out.push_back(&blk.d1.b);
    out.push_back(&blk.bn1.gamma);
    out.push_back(&blk.bn1.beta);
    out.push_back(&blk.d2.w);
    out.push_back(&blk.d2.b);
    out.push_back(&blk.bn2.gamma);
    out.push_back(&blk.bn2.beta);
  }
  out.push_back(&head_out.w);
  out.push_back(&head_out.b);
  return out;
}

std::vector<const Param *> RegressorModel::parameters() const {
  auto mutable_params = const_cast<RegressorModel *>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

std::vector<std::pair<std::string, std::vector<double> *>>
RegressorModel::buffers() {
  std::vector<std::pair<std::string, std::vector<double> *>> out;
  std::uint32_t index = 0;
  for (ResidualBlock &blk : blocks) {
    const std::string base = "head.block" + std::to_string(index++);
    out.emplace_back(base + ".bn1.running_mean", &blk.bn1.running_mean);
    out.emplace_back(base + ".bn1.running_var", &blk.bn1.running_var);
    out.emplace_back(base + ".bn2.running_mean", &blk.bn2.running_mean);
    out.emplace_back(base + ".bn2.running_var", &blk.bn2.running_var);
  }
  return out;
}

std::vector<std::pair<std::string, const std::vector<double> *>>
RegressorModel::buffers() const {
  std::vector<std::pair<std::string, const std::vector<double> *>> out;
  for (auto &[name, values] : const_cast<RegressorModel *>(this)->buffers())
    out.emplace_back(name, values);
  return out;
}

RegressorModel make_model(std::uint64_t seed, const ModelDims &dims,
                          const PrepConfig &prep) {
  RegressorModel m;
  m.dims = dims;
  m.prep = prep;
  Rng rng(seed);
  m.id_mlp.init("id_mlp", 1, dims.node_emb, dims.node_emb, rng);
  m.edge_mlp.init("edge_mlp", 1, dims.edge_emb, dims.edge_emb, rng);
  m.gine1.init("gine1", dims.node_emb, dims.edge_emb, dims.hidden, rng);
  m.gine2.init("gine2", dims.hidden, dims.edge_emb, dims.hidden, rng);
  m.head_in.init("head.in", dims.hidden, dims.hidden, rng);
  m.blocks.resize(dims.blocks);
  for (std::uint32_t i = 0; i < dims.blocks; ++i)
    m.blocks[i].init("head.block" + std::to_string(i), dims.hidden, rng);
  m.head_out.init("head.out", dims.hidden, 1, rng);
  return m;
}

Batch make_batch(const std::vector<const StateGraph *> &graphs) {
  if (graphs.empty())
    throw std::invalid_argument("make_batch: empty batch");
  Batch batch;
  batch.graph_count = static_cast<std::uint32_t>(graphs.size());
  std::uint32_t offset = 0;
  for (std::uint32_t g = 0; g < graphs.size(); ++g) {
    const StateGraph &graph = *graphs[g];
    if (graph.nodes.empty())
      throw std::invalid_argument("make_batch: graph with no nodes");
    FeatureArrays arrays = to_feature_arrays(graph);
    for (double f : arrays.node_features) {
      batch.node_ids.push_back(f);
      batch.node_graph.push_back(g);
    }
    for (std::size_t k = 0; k < arrays.edge_src.size(); ++k) {
      batch.edge_src.push_back(arrays.edge_src[k] + offset);
      batch.edge_dst.push_back(arrays.edge_dst[k] + offset);
      batch.edge_attr.push_back(arrays.edge_attr[k]);
    }
    offset += static_cast<std::uint32_t>(graph.nodes.size());
  }
  return batch;
}

Batch make_batch(const StateGraph &graph) { return make_batch({&graph}); }

std::vector<double> forward_pass(const RegressorModel &model,
                                 const Batch &batch, ForwardCache &cache,
                                 Rng *dropout_rng, bool batch_stats) {
  const std::uint32_t n = static_cast<std::uint32_t>(batch.node_ids.size());
  const std::uint32_t m = static_cast<std::uint32_t>(batch.edge_src.size());
  if (n == 0)
    throw std::invalid_argument("forward: empty batch");

  Mat ids(n, 1);
  for (std::uint32_t i = 0; i < n; ++i)
    ids.at(i, 0) = batch.node_ids[i];
  Mat node_emb = model.id_mlp.forward(ids, cache.id_cache);

  Mat attrs(m, 1);
  for (std::uint32_t k = 0; k < m; ++k)
    attrs.at(k, 0) = batch.edge_attr[k];
  Mat edge_emb = model.edge_mlp.forward(attrs, cache.edge_cache);

  cache.conv1_pre = model.gine1.forward(node_emb, edge_emb, batch.edge_src,
                                        batch.edge_dst, cache.gine1_cache);
  Mat h1 = relu(cache.conv1_pre);
  cache.conv2_pre = model.gine2.forward(h1, edge_emb, batch.edge_src,
                                        batch.edge_dst, cache.gine2_cache);
  Mat h2 = relu(cache.conv2_pre);

  // global mean pooling per graph
  cache.graph_sizes.assign(batch.graph_count, 0);
  for (std::uint32_t i = 0; i < n; ++i)
    ++cache.graph_sizes[batch.node_graph[i]];
  for (std::uint32_t g = 0; g < batch.graph_count; ++g)
    if (cache.graph_sizes[g] == 0)
      throw std::invalid_argument("forward: empty graph in batch");
  cache.pooled = Mat(batch.graph_count, h2.cols);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t g = batch.node_graph[i];
    for (std::uint32_t c = 0; c < h2.cols; ++c)
      cache.pooled.at(g, c) += h2.at(i, c);
  }
  for (std::uint32_t g = 0; g < batch.graph_count; ++g)
    for (std::uint32_t c = 0; c < cache.pooled.cols; ++c)
      cache.pooled.at(g, c) /= cache.graph_sizes[g];

  cache.head_pre = model.head_in.forward(cache.pooled);
  Mat h = relu(cache.head_pre);
  cache.block_caches.assign(model.blocks.size(), {});
  for (std::size_t b = 0; b < model.blocks.size(); ++b)
    h = model.blocks[b].forward(h, cache.block_caches[b], batch_stats,
                                dropout_rng);
  cache.z = model.head_out.forward(h);

  cache.sig.resize(batch.graph_count);
  std::vector<double> preds(batch.graph_count);
  for (std::uint32_t g = 0; g < batch.graph_count; ++g) {
    const double s = 1.0 / (1.0 + std::exp(-cache.z.at(g, 0)));
    cache.sig[g] = s;
    preds[g] = std::clamp(s, model.prep.min_val, model.prep.max_val);
  }
  return preds;
}

std::vector<double> forward(RegressorModel &model, const Batch &batch,
                            ForwardCache &cache, Rng &rng) {
  std::vector<double> preds =
      forward_pass(model, batch, cache, &rng, /*batch_stats=*/true);
  for (std::size_t b = 0; b < model.blocks.size(); ++b)
    model.blocks[b].update_running(cache.block_caches[b]);
  return preds;
}

std::vector<double> predict(const RegressorModel &model, const Batch &batch) {
  ForwardCache cache;
  return forward_pass(model, batch, cache, nullptr, /*batch_stats=*/false);
}

double mse_loss(const std::vector<double> &pred,
                const std::vector<double> &target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("mse_loss: length mismatch");
  double acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / pred.size();
}

void zero_grads(RegressorModel &model) {
  for (Param *p : model.parameters())
    std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

void backward(RegressorModel &model, const Batch &batch, ForwardCache &cache,
              const std::vector<double> &predictions,
              const std::vector<double> &targets) {
  const std::uint32_t graphs = cache.z.rows;
  if (predictions.size() != graphs || targets.size() != graphs)
    throw std::invalid_argument("backward: prediction/target size");

  // d(mse)/dz through clamp and sigmoid
  Mat dz(graphs, 1);
  for (std::uint32_t g = 0; g < graphs; ++g) {
    const double s = cache.sig[g];
    if (s <= model.prep.min_val || s >= model.prep.max_val) {
      dz.at(g, 0) = 0; // clamped flat
      continue;
    }
    const double dpred = 2.0 * (predictions[g] - targets[g]) / graphs;
    dz.at(g, 0) = dpred * s * (1.0 - s);
  }

  Mat h_final = relu(cache.block_caches.empty()
                         ? cache.head_pre
                         : cache.block_caches.back().sum_pre);
  Mat dh = model.head_out.backward(dz, h_final);
  for (std::size_t b = model.blocks.size(); b-- > 0;)
    dh = model.blocks[b].backward(dh, cache.block_caches[b]);
  Mat dhead_pre = relu_backward(dh, cache.head_pre);
  Mat dpool = model.head_in.backward(dhead_pre, cache.pooled);

  // un-pool: each node receives its graph's gradient / node count
  const std::uint32_t n = static_cast<std::uint32_t>(batch.node_ids.size());
  Mat dh2(n, dpool.cols);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t g = batch.node_graph[i];
    for (std::uint32_t c = 0; c < dpool.cols; ++c)
      dh2.at(i, c) = dpool.at(g, c) / cache.graph_sizes[g];
  }

  Mat dconv2 = relu_backward(dh2, cache.conv2_pre);
  Mat d_edge2;
  Mat dh1 = model.gine2.backward(dconv2, batch.edge_src, batch.edge_dst,
                                 cache.gine2_cache, d_edge2);
  Mat dconv1 = relu_backward(dh1, cache.conv1_pre);
  Mat d_edge1;
  Mat dnode = model.gine1.backward(dconv1, batch.edge_src, batch.edge_dst,
                                   cache.gine1_cache, d_edge1);

  Mat d_edge_emb = d_edge1;
  for (std::size_t i = 0; i < d_edge_emb.a.size(); ++i)
    d_edge_emb.a[i] += d_edge2.a[i];

  model.id_mlp.backward(dnode, cache.id_cache);
  if (d_edge_emb.rows > 0)
    model.edge_mlp.backward(d_edge_emb, cache.edge_cache);
}

OptimizerState make_optimizer_state(const RegressorModel &model) {
  OptimizerState state;
  for (const Param *p : model.parameters()) {
    state.m.emplace_back(p->value.size(), 0.0);
    state.v.emplace_back(p->value.size(), 0.0);
  }
  return state;
}

void adamw_step(RegressorModel &model, OptimizerState &state,
                const AdamWConfig &cfg) {
  std::vector<Param *> params = model.parameters();
  if (state.m.size() != params.size())
    throw std::invalid_argument("adamw_step: optimizer/model mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double> &w = params[p]->value;
    const std::vector<double> &g = params[p]->grad;
    std::vector<double> &m = state.m[p];
    std::vector<double> &v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= cfg.lr * cfg.weight_decay * w[i];
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

TrainingSet prepare_dataset(const std::vector<DatasetRecord> &records,
                            const PrepConfig &cfg, std::uint64_t seed) {
  // step 1: drop unlabeled samples, clamp labels to d_max
  std::vector<std::size_t> kept;
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (records[i].distance) {
      kept.push_back(i);
      labels.push_back(std::min(*records[i].distance, cfg.d_max));
    }
  if (kept.empty())
    throw std::invalid_argument("prepare_dataset: no labeled samples");

  // step 2: cap each distance bin at floor(p_m * total), iterated to a
  // fixed point; a single bin cannot satisfy the cap and is left alone
  std::map<std::uint32_t, std::vector<std::size_t>> bins;
  for (std::size_t k = 0; k < kept.size(); ++k)
    bins[labels[k]].push_back(k);
  if (bins.size() > 1) {
    std::map<std::uint32_t, std::size_t> quota;
    for (const auto &[d, members] : bins)
      quota[d] = members.size();
    for (;;) {
      std::size_t total = 0;
      for (const auto &[d, q] : quota)
        total += q;
      const std::size_t cap =
          static_cast<std::size_t>(cfg.p_m * static_cast<double>(total));
      bool changed = false;
      for (auto &[d, q] : quota)
        if (q > cap && cap > 0) {
          q = cap;
          changed = true;
        }
      if (!changed)
        break;
    }
    Rng rng(seed);
    std::vector<std::size_t> selected;
    for (auto &[d, members] : bins) {
      rng.shuffle(members);
      members.resize(std::min(members.size(), quota[d]));
      selected.insert(selected.end(), members.begin(), members.end());
    }
    std::sort(selected.begin(), selected.end());
    std::vector<std::size_t> new_kept;
    std::vector<std::uint32_t> new_labels;
    for (std::size_t k : selected) {
      new_kept.push_back(kept[k]);
      new_labels.push_back(labels[k]);
    }
    kept = std::move(new_kept);
    labels = std::move(new_labels);
  }

  // step 3: normalize targets
  TrainingSet out;
  for (std::size_t k = 0; k < kept.size(); ++k) {
    out.graphs.push_back(records[kept[k]].graph);
    out.raw_distances.push_back(labels[k]);
    out.targets.push_back(normalize_distance(labels[k], cfg));
  }
  return out;
}

} // namespace epiplan
