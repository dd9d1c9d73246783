#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "astro/align.hpp"
#include "astro/image.hpp"
#include "astro/patch_pair.hpp"

namespace astro {

struct ConvLayer {
  int out_channels = 0;
  int in_channels = 0;
  int kh = 0;
  int kw = 0;
  std::vector<float> weights;  // [out][in][kh][kw]
  std::vector<float> biases;   // [out]
  bool relu = true;

  size_t weight_count() const {
    return static_cast<size_t>(out_channels) * in_channels * kh * kw;
  }
};

struct CnnModel {
  std::vector<ConvLayer> layers;
  int input_window = 32;
  int output_window = 14;

  size_t param_count() const;
  int receptive_field() const;  // sum of kernel sizes minus (layers - 1)
};

// Paper architectures: 1 -> 64 (10x10) -> 16 (6x6) -> 1 (5x5), ReLU
// everywhere, and the single 19x19 linear filter baseline.
CnnModel build_3cnn(uint64_t seed);
CnnModel build_1cnn(uint64_t seed);

struct ForwardResult {
  Image output;
  // feature_maps[layer][channel], post-activation; filled when requested
  std::vector<std::vector<Image>> feature_maps;
};

ForwardResult forward(const CnnModel& model, const Image& input, bool keep_intermediates = false);

template <typename T>
struct Gradients {
  double loss = 0.0;
  // canonical parameter order: per layer, weights [out][in][kh][kw] then biases
  std::vector<T> values;
};

// Mean over batch x output pixels of the squared error, with gradients for
// every weight and bias.
Gradients<float> loss_and_gradients(const CnnModel& model, std::span<const PatchPair> batch);
// Same computation with the whole pipeline promoted to double, for the
// finite-difference oracle.
Gradients<double> loss_and_gradients_f64(const CnnModel& model, std::span<const PatchPair> batch);
double evaluate_loss(const CnnModel& model, std::span<const PatchPair> batch);

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  bool nesterov = true;
  int batch_size = 50;
  int max_epochs = 30;
  bool early_stop = true;
  uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;  // mean minibatch loss per epoch
  std::vector<double> val_loss;    // full validation MSE after each epoch
  int epochs_run = 0;
  int best_epoch = 0;  // 1-based epoch whose snapshot is returned
  bool stopped_early = false;
};

// Minibatch SGD with Nesterov momentum and one-step-patience early stopping;
// returns the snapshot from before the first validation increase.
CnnModel train(const CnnModel& init, std::span<const PatchPair> train_set,
               std::span<const PatchPair> val_set, const TrainConfig& cfg,
               TrainHistory* history = nullptr);

// Shared float/double compute engine behind the free functions above; the
// double instantiation exists for gradient checking.
template <typename T>
class CnnEngine {
 public:
  explicit CnnEngine(const CnnModel& model);

  size_t param_count() const { return params_.size(); }
  const std::vector<T>& params() const { return params_; }
  void set_params(std::span<const T> p);
  void export_to(CnnModel& model) const;

  double batch_loss(std::span<const PatchPair* const> batch);
  double loss_and_gradients(std::span<const PatchPair* const> batch, std::vector<T>& grad);
  Image infer(const Image& input, std::vector<std::vector<Image>>* feature_maps = nullptr) const;

 private:
  struct Layer {
    int oc, ic, kh, kw;
    bool relu;
    AlignedVec<T> w_fwd;  // [u][v][i][o]
    AlignedVec<T> w_bwd;  // [u][v][o][i] rotated 180 degrees
    AlignedVec<T> bias;   // [o]
  };
  struct Workspace;

  void repack();
  void forward_sample(const Image& input, Workspace& ws) const;
  double backward_sample(const Image& target, Workspace& ws, T* grad) const;

  std::vector<Layer> layers_;
  std::vector<T> params_;        // canonical order
  AlignedVec<T> packed_grad_;  // batch-reduction scratch, packed order
  std::vector<AlignedVec<T>> sample_grads_;
  std::vector<double> sample_losses_;
};

extern template class CnnEngine<float>;
extern template class CnnEngine<double>;

}  // namespace astro
