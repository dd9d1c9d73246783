#include "astro/cnn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "astro/rng.hpp"
#include "astro/threads.hpp"
#include "cnn_kernels.hpp"

namespace astro {

size_t CnnModel::param_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weight_count() + l.out_channels;
  return n;
}

int CnnModel::receptive_field() const {
  int rf = 1;
  for (const auto& l : layers) rf += l.kh - 1;
  return rf;
}

namespace {

ConvLayer glorot_layer(int oc, int ic, int kh, int kw, bool relu, Rng& rng) {
  ConvLayer l;
  l.out_channels = oc;
  l.in_channels = ic;
  l.kh = kh;
  l.kw = kw;
  l.relu = relu;
  const double fan_in = static_cast<double>(ic) * kh * kw;
  const double fan_out = static_cast<double>(oc) * kh * kw;
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  l.weights.resize(l.weight_count());
  for (auto& w : l.weights) w = static_cast<float>((2.0 * rng.uniform() - 1.0) * limit);
  l.biases.assign(oc, 0.0f);
  return l;
}

}  // namespace

CnnModel build_3cnn(uint64_t seed) {
  Rng rng(seed);
  CnnModel m;
  m.layers.push_back(glorot_layer(64, 1, 10, 10, true, rng));
  m.layers.push_back(glorot_layer(16, 64, 6, 6, true, rng));
  m.layers.push_back(glorot_layer(1, 16, 5, 5, true, rng));
  m.input_window = 32;
  m.output_window = 14;
  return m;
}

CnnModel build_1cnn(uint64_t seed) {
  Rng rng(seed);
  CnnModel m;
  m.layers.push_back(glorot_layer(1, 1, 19, 19, false, rng));
  m.input_window = 32;
  m.output_window = 14;
  return m;
}

template <typename T>
struct CnnEngine<T>::Workspace {
  std::vector<AlignedVec<T>> act;    // act[0] = input
  std::vector<AlignedVec<T>> delta;  // same shapes as act
  std::vector<AlignedVec<T>> dpad;   // zero-padded delta, one per layer
  AlignedVec<T> zbias;
  std::vector<int> h, w;  // dims per level
};

template <typename T>
CnnEngine<T>::CnnEngine(const CnnModel& model) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (model.layers.front().in_channels != 1) {
    throw std::invalid_argument("first layer must take a single channel");
  }
  if (model.layers.back().out_channels != 1) {
    throw std::invalid_argument("last layer must emit a single channel");
  }
  int prev_oc = 1;
  for (size_t k = 0; k < model.layers.size(); ++k) {
    const auto& l = model.layers[k];
    if (l.kh < 1 || l.kw < 1 || l.out_channels < 1 || l.in_channels < 1) {
      throw std::invalid_argument("layer " + std::to_string(k) + " has invalid dimensions");
    }
    if (l.in_channels != prev_oc) {
      throw std::invalid_argument("channel chaining violated at layer " + std::to_string(k));
    }
    if (l.weights.size() != l.weight_count() || l.biases.size() != static_cast<size_t>(l.out_channels)) {
      throw std::invalid_argument("layer " + std::to_string(k) + " parameter arrays mis-sized");
    }
    for (float w : l.weights) {
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight in layer " + std::to_string(k));
    }
    prev_oc = l.out_channels;
    layers_.push_back(Layer{l.out_channels, l.in_channels, l.kh, l.kw, l.relu, {}, {}, {}});
  }
  params_.reserve(model.param_count());
  for (const auto& l : model.layers) {
    for (float w : l.weights) params_.push_back(static_cast<T>(w));
    for (float b : l.biases) params_.push_back(static_cast<T>(b));
  }
  repack();
}

template <typename T>
void CnnEngine<T>::repack() {
  size_t off = 0;
  for (auto& l : layers_) {
    const size_t wc = static_cast<size_t>(l.oc) * l.ic * l.kh * l.kw;
    l.w_fwd.resize(wc);
    l.w_bwd.resize(wc);
    l.bias.resize(l.oc);
    const T* canon = params_.data() + off;
    for (int o = 0; o < l.oc; ++o) {
      for (int i = 0; i < l.ic; ++i) {
        for (int u = 0; u < l.kh; ++u) {
          for (int v = 0; v < l.kw; ++v) {
            T w = canon[((static_cast<size_t>(o) * l.ic + i) * l.kh + u) * l.kw + v];
            l.w_fwd[((static_cast<size_t>(u) * l.kw + v) * l.ic + i) * l.oc + o] = w;
            // 180-degree rotation with o as the input channel: the data
            // gradient is then a plain valid convolution over padded delta.
            l.w_bwd[((static_cast<size_t>(l.kh - 1 - u) * l.kw + (l.kw - 1 - v)) * l.oc + o) *
                        l.ic +
                    i] = w;
          }
        }
      }
    }
    off += wc;
    for (int o = 0; o < l.oc; ++o) l.bias[o] = params_[off + o];
    off += l.oc;
  }
}

template <typename T>
void CnnEngine<T>::set_params(std::span<const T> p) {
  if (p.size() != params_.size()) throw std::invalid_argument("parameter vector size mismatch");
  params_.assign(p.begin(), p.end());
  repack();
}

template <typename T>
void CnnEngine<T>::export_to(CnnModel& model) const {
  size_t off = 0;
  if (model.layers.size() != layers_.size()) {
    throw std::invalid_argument("model/engine layer count mismatch");
  }
  for (auto& l : model.layers) {
    for (auto& w : l.weights) w = static_cast<float>(params_[off++]);
    for (auto& b : l.biases) b = static_cast<float>(params_[off++]);
  }
}

template <typename T>
void CnnEngine<T>::forward_sample(const Image& input, Workspace& ws) const {
  const size_t levels = layers_.size() + 1;
  ws.act.resize(levels);
  ws.delta.resize(levels);
  ws.h.resize(levels);
  ws.w.resize(levels);

  ws.h[0] = input.height;
  ws.w[0] = input.width;
  ws.act[0].resize(input.data.size());
  for (size_t j = 0; j < input.data.size(); ++j) ws.act[0][j] = static_cast<T>(input.data[j]);

  for (size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    const int oh = ws.h[k] - l.kh + 1;
    const int ow = ws.w[k] - l.kw + 1;
    if (oh < 1 || ow < 1) {
      throw std::invalid_argument("input " + std::to_string(input.height) + "x" +
                                  std::to_string(input.width) +
                                  " smaller than the receptive field");
    }
    ws.h[k + 1] = oh;
    ws.w[k + 1] = ow;
    ws.act[k + 1].resize(static_cast<size_t>(oh) * ow * l.oc);
    detail::conv_forward<T>(ws.act[k].data(), l.w_fwd.data(), l.bias.data(),
                            ws.act[k + 1].data(), ws.w[k], l.ic, l.oc, oh, ow, l.kh, l.kw,
                            l.relu);
  }
}

template <typename T>
double CnnEngine<T>::backward_sample(const Image& target, Workspace& ws, T* grad) const {
  const size_t L = layers_.size();
  const int oh = ws.h[L], ow = ws.w[L];
  if (target.height != oh || target.width != ow) {
    throw std::invalid_argument("target " + std::to_string(target.height) + "x" +
                                std::to_string(target.width) + " does not match output " +
                                std::to_string(oh) + "x" + std::to_string(ow));
  }
  const int npix = oh * ow;
  const T scale = T(2) / static_cast<T>(npix);

  ws.delta[L].resize(static_cast<size_t>(npix));
  double loss = 0.0;
  for (int j = 0; j < npix; ++j) {
    T d = ws.act[L][j] - static_cast<T>(target.data[j]);
    loss += static_cast<double>(d) * static_cast<double>(d);
    ws.delta[L][j] = scale * d;
  }
  loss /= npix;

  if (layers_.back().relu) {
    detail::relu_backward<T>(ws.act[L].data(), ws.delta[L].data(), static_cast<size_t>(npix));
  }

  size_t total = 0;
  for (const Layer& l : layers_) {
    total += static_cast<size_t>(l.oc) * l.ic * l.kh * l.kw + l.oc;
  }

  // grad is written in the packed layout ([u][v][i][o] weights, then biases,
  // per layer); the per-batch reduction transposes to canonical order once.
  size_t off = total;
  for (size_t k = L; k-- > 0;) {
    const Layer& l = layers_[k];
    const size_t wc = static_cast<size_t>(l.oc) * l.ic * l.kh * l.kw;
    off -= wc + l.oc;
    const int loh = ws.h[k + 1], low = ws.w[k + 1];

    T* db = grad + off + wc;
    std::fill(db, db + l.oc, T(0));
    detail::bias_grad<T>(ws.delta[k + 1].data(), loh * low, l.oc, db);

    T* dw = grad + off;
    std::fill(dw, dw + wc, T(0));
    detail::weight_grad<T>(ws.act[k].data(), ws.delta[k + 1].data(), dw, ws.w[k], l.ic, l.oc,
                           loh, low, l.kh, l.kw);

    if (k > 0) {
      // delta[k] = delta[k+1] (zero-padded) convolved with the rotated
      // weights; the pad border stays zero across samples.
      const int ph = loh + 2 * (l.kh - 1);
      const int pw = low + 2 * (l.kw - 1);
      ws.dpad.resize(L);
      auto& dpad = ws.dpad[k];
      const size_t need = static_cast<size_t>(ph) * pw * l.oc;
      if (dpad.size() != need) dpad.assign(need, T(0));
      for (int r = 0; r < loh; ++r) {
        std::copy_n(ws.delta[k + 1].data() + static_cast<size_t>(r) * low * l.oc,
                    static_cast<size_t>(low) * l.oc,
                    dpad.data() + ((static_cast<size_t>(r) + l.kh - 1) * pw + l.kw - 1) * l.oc);
      }
      if (ws.zbias.size() < static_cast<size_t>(l.ic)) ws.zbias.assign(l.ic, T(0));
      ws.delta[k].resize(ws.act[k].size());
      detail::conv_forward<T>(dpad.data(), l.w_bwd.data(), ws.zbias.data(), ws.delta[k].data(),
                              pw, l.oc, l.ic, ws.h[k], ws.w[k], l.kh, l.kw, false);
      if (layers_[k - 1].relu) {
        detail::relu_backward<T>(ws.act[k].data(), ws.delta[k].data(), ws.act[k].size());
      }
    }
  }
  return loss;
}

template <typename T>
double CnnEngine<T>::batch_loss(std::span<const PatchPair* const> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  sample_losses_.assign(batch.size(), 0.0);
  parallel_chunks(static_cast<int64_t>(batch.size()), [&](int64_t b, int64_t e) {
    Workspace ws;
    for (int64_t s = b; s < e; ++s) {
      forward_sample(batch[s]->input, ws);
      const size_t L = layers_.size();
      const int npix = ws.h[L] * ws.w[L];
      const Image& tgt = batch[s]->target;
      if (tgt.height != ws.h[L] || tgt.width != ws.w[L]) {
        throw std::invalid_argument("target does not match model output window");
      }
      double loss = 0.0;
      for (int j = 0; j < npix; ++j) {
        double d = static_cast<double>(ws.act[L][j]) - tgt.data[j];
        loss += d * d;
      }
      sample_losses_[s] = loss / npix;
    }
  });
  double total = 0.0;
  for (double l : sample_losses_) total += l;
  return total / static_cast<double>(batch.size());
}

template <typename T>
double CnnEngine<T>::loss_and_gradients(std::span<const PatchPair* const> batch,
                                        std::vector<T>& grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const size_t n = params_.size();
  sample_grads_.resize(batch.size());
  sample_losses_.assign(batch.size(), 0.0);
  parallel_chunks(static_cast<int64_t>(batch.size()), [&](int64_t b, int64_t e) {
    Workspace ws;
    for (int64_t s = b; s < e; ++s) {
      sample_grads_[s].resize(n);
      forward_sample(batch[s]->input, ws);
      sample_losses_[s] = backward_sample(batch[s]->target, ws, sample_grads_[s].data());
    }
  });
  // reduce in sample order: identical result for any thread count
  packed_grad_.assign(n, T(0));
  for (size_t s = 0; s < batch.size(); ++s) {
    const T* g = sample_grads_[s].data();
    for (size_t j = 0; j < n; ++j) packed_grad_[j] += g[j];
  }
  const T inv = T(1) / static_cast<T>(batch.size());
  for (size_t j = 0; j < n; ++j) packed_grad_[j] *= inv;

  // packed ([u][v][i][o] per layer) -> canonical ([o][i][u][v] per layer)
  grad.resize(n);
  size_t off = 0;
  for (const Layer& l : layers_) {
    const size_t wc = static_cast<size_t>(l.oc) * l.ic * l.kh * l.kw;
    const T* pw = packed_grad_.data() + off;
    T* cw = grad.data() + off;
    for (int o = 0; o < l.oc; ++o) {
      for (int i = 0; i < l.ic; ++i) {
        for (int u = 0; u < l.kh; ++u) {
          for (int v = 0; v < l.kw; ++v) {
            cw[((static_cast<size_t>(o) * l.ic + i) * l.kh + u) * l.kw + v] =
                pw[((static_cast<size_t>(u) * l.kw + v) * l.ic + i) * l.oc + o];
          }
        }
      }
    }
    std::copy(pw + wc, pw + wc + l.oc, cw + wc);
    off += wc + l.oc;
  }
  double total = 0.0;
  for (double l : sample_losses_) total += l;
  return total / static_cast<double>(batch.size());
}

template <typename T>
Image CnnEngine<T>::infer(const Image& input, std::vector<std::vector<Image>>* feature_maps) const {
  Workspace ws;
  forward_sample(input, ws);
  const size_t L = layers_.size();
  if (feature_maps) {
    feature_maps->clear();
    for (size_t k = 0; k < L; ++k) {
      const int oc = layers_[k].oc, oh = ws.h[k + 1], ow = ws.w[k + 1];
      std::vector<Image> maps;
      maps.reserve(oc);
      for (int o = 0; o < oc; ++o) {
        Image m(oh, ow);
        for (int p = 0; p < oh * ow; ++p) {
          m.data[p] = static_cast<float>(ws.act[k + 1][static_cast<size_t>(p) * oc + o]);
        }
        maps.push_back(std::move(m));
      }
      feature_maps->push_back(std::move(maps));
    }
  }
  Image out(ws.h[L], ws.w[L]);
  for (size_t j = 0; j < out.data.size(); ++j) out.data[j] = static_cast<float>(ws.act[L][j]);
  return out;
}

template class CnnEngine<float>;
template class CnnEngine<double>;

ForwardResult forward(const CnnModel& model, const Image& input, bool keep_intermediates) {
  CnnEngine<float> eng(model);
  ForwardResult res;
  res.output = eng.infer(input, keep_intermediates ? &res.feature_maps : nullptr);
  return res;
}

namespace {

std::vector<const PatchPair*> to_pointers(std::span<const PatchPair> batch) {
  std::vector<const PatchPair*> p(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) p[i] = &batch[i];
  return p;
}

}  // namespace

Gradients<float> loss_and_gradients(const CnnModel& model, std::span<const PatchPair> batch) {
  CnnEngine<float> eng(model);
  auto ptrs = to_pointers(batch);
  Gradients<float> g;
  g.loss = eng.loss_and_gradients(ptrs, g.values);
  return g;
}

Gradients<double> loss_and_gradients_f64(const CnnModel& model, std::span<const PatchPair> batch) {
  CnnEngine<double> eng(model);
  auto ptrs = to_pointers(batch);
  Gradients<double> g;
  g.loss = eng.loss_and_gradients(ptrs, g.values);
  return g;
}

double evaluate_loss(const CnnModel& model, std::span<const PatchPair> batch) {
  CnnEngine<float> eng(model);
  auto ptrs = to_pointers(batch);
  return eng.batch_loss(ptrs);
}

CnnModel train(const CnnModel& init, std::span<const PatchPair> train_set,
               std::span<const PatchPair> val_set, const TrainConfig& cfg,
               TrainHistory* history) {
  if (train_set.empty() || val_set.empty()) {
    throw std::invalid_argument("training and validation sets must be non-empty");
  }
  if (cfg.learning_rate < 0) throw std::invalid_argument("learning rate must be nonnegative");
  if (cfg.momentum < 0 || cfg.momentum >= 1) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (cfg.max_epochs < 1) throw std::invalid_argument("epoch count must be positive");

  CnnEngine<float> eng(init);
  const size_t n = eng.param_count();
  std::vector<float> theta(eng.params());
  std::vector<float> velocity(n, 0.0f);
  std::vector<float> look(n), grad(n);
  const float lr = static_cast<float>(cfg.learning_rate);
  const float mu = static_cast<float>(cfg.momentum);

  std::vector<const PatchPair*> val_ptrs = to_pointers(val_set);
  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::vector<const PatchPair*> batch_ptrs;
  Rng rng(cfg.seed);

  TrainHistory hist;
  std::vector<float> snapshot = theta;
  double prev_val = 0.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Fisher-Yates from the run's continuing stream
    for (size_t i = order.size(); i-- > 1;) {
      size_t j = static_cast<size_t>(rng.below(static_cast<uint64_t>(i + 1)));
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch_ptrs.resize(stop - start);
      for (size_t i = start; i < stop; ++i) batch_ptrs[i - start] = &train_set[order[i]];

      if (cfg.nesterov && mu > 0) {
        for (size_t j = 0; j < n; ++j) look[j] = theta[j] + mu * velocity[j];
        eng.set_params(look);
      } else {
        eng.set_params(theta);
      }
      double loss = eng.loss_and_gradients(batch_ptrs, grad);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " + std::to_string(batches + 1));
      }
      epoch_loss += loss;
      ++batches;

      for (size_t j = 0; j < n; ++j) {
        velocity[j] = mu * velocity[j] - lr * grad[j];
        theta[j] += velocity[j];
      }
    }

    eng.set_params(theta);
    double val = eng.batch_loss(val_ptrs);
    hist.train_loss.push_back(epoch_loss / batches);
    hist.val_loss.push_back(val);
    hist.epochs_run = epoch;

    if (cfg.early_stop && epoch >= 2 && val > prev_val) {
      hist.stopped_early = true;
      hist.best_epoch = epoch - 1;
      theta = snapshot;
      break;
    }
    snapshot = theta;
    prev_val = val;
    hist.best_epoch = epoch;
  }

  eng.set_params(theta);
  CnnModel out = init;
  eng.export_to(out);
  if (history) *history = std::move(hist);
  return out;
}

}  // namespace astro
