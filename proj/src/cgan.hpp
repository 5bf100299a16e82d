#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "nn/adam.hpp"
#include "nn/checkpoint.hpp"
#include "nn/ops.hpp"

namespace cgmkit {

// Affine maps between physical units and the network's [-1, 1] range.
struct Normalizer {
  double gain_min_db = -250.0;
  double gain_max_db = -70.0;
  double extent_x = 256.0;
  double extent_y = 256.0;
  double extent_z = 128.0;

  void validate() const;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

enum class Activation { none, relu, leaky_relu, sigmoid, tanh_unit };

// One conv (or transposed conv) stage with optional batch normalization.
struct ConvBlock {
  bool transposed = false;
  bool has_bn = false;
  Activation act = Activation::none;
  nn::Tensor w, b;
  nn::Tensor bn_scale, bn_shift, bn_mean, bn_var;
};

struct GanHyper {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double lambda_re = 100.0;
  int batch = 0;  // 0 = min(16, ceil(train_count/10))
  int epochs = 150;
  std::uint64_t seed = 1;

  friend bool operator==(const GanHyper&, const GanHyper&) = default;
};

struct EpochLoss {
  double d_loss = 0, g_loss = 0, recon = 0;
};

// Generator + discriminator for a side^3 grid with log2(side) stages.
// Generator channels taper from 2^(4+stages) down to 1; the discriminator
// mirrors them from a 4-channel input (map + broadcast coordinates).
struct GanModel {
  int side = 32;
  Normalizer norm;
  GanHyper hyper;
  Sha256 env_hash{};
  std::vector<ConvBlock> gen, dis;
  std::vector<EpochLoss> loss_trace;
  int best_epoch = 0;
  int trained_count = 0;
};

GanModel build_gan_model(int side, const Normalizer& norm, const GanHyper& hyper,
                         const Sha256& env_hash = {});

// Layer-by-layer shape contract; throws on any violation.
void validate_architecture(const GanModel& model);

std::int64_t parameter_count(const GanModel& model);

// Coordinate conditioning: each channel holds one coordinate affinely
// mapped to [-1, 1]. Returns shape (1,3,1,1,1).
nn::Tensor encode_coordinate(const Point3& o, const Normalizer& norm);

// Gain map <-> unit range. decode clamps to [gain_min_db, gain_max_db].
nn::Tensor encode_cgm(const Cgm& cgm, const Normalizer& norm);
std::vector<float> decode_cgm(const nn::Tensor& unit, const Normalizer& norm);

// Full forward passes. Training mode selects batch statistics for the
// batch norms; inference mode uses running statistics.
nn::Tensor generator_forward(GanModel& model, const nn::Tensor& coords, bool training);
nn::Tensor discriminator_forward(GanModel& model, const nn::Tensor& cgm_unit,
                                 const nn::Tensor& coords, bool training);

// The two objectives evaluated on one batch (no parameter updates).
double d_loss(GanModel& model, const nn::Tensor& real_unit, const nn::Tensor& coords);
double g_loss(GanModel& model, const nn::Tensor& real_unit, const nn::Tensor& coords);

using TrainProgress = std::function<void(int epoch, const EpochLoss&)>;

// Alternating one D step / one G step per batch with Adam; keeps the
// snapshot with the lowest epoch-mean reconstruction loss. Deterministic
// per hyper.seed. Throws ErrorKind::divergence on non-finite losses.
void train(GanModel& model, const CgmDataset& dataset, const TrainProgress& progress = {});

// encode -> generator (inference mode) -> decode.
Cgm infer(const GanModel& model, const Point3& o);

nn::Checkpoint model_to_checkpoint(const GanModel& model);
GanModel model_from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace cgmkit
