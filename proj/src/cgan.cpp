#include "cgan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "rng.hpp"

namespace cgmkit {

using nn::Tensor;
using nlohmann::json;

void Normalizer::validate() const {
  require(gain_min_db < gain_max_db, ErrorKind::validation,
          "normalizer dB range must be increasing");
  require(extent_x > 0 && extent_y > 0 && extent_z > 0, ErrorKind::validation,
          "normalizer extents must be positive");
}

namespace {

constexpr float kLeakySlope = 0.2f;
constexpr double kInitStd = 0.02;

int stages_for(int side) {
  require(side >= 16, ErrorKind::validation, "grid side must be at least 16");
  int stages = 0, s = side;
  while (s > 1 && s % 2 == 0) {
    s /= 2;
    ++stages;
  }
  require(s == 1, ErrorKind::validation, "grid side must be a power of two");
  return stages;
}

std::vector<int> generator_channels(int stages) {
  std::vector<int> ch{3};
  for (int i = 0; i < stages - 1; ++i) ch.push_back(1 << (4 + stages - i));
  ch.push_back(1);
  return ch;
}

std::vector<int> discriminator_channels(int stages) {
  std::vector<int> ch{4};
  for (int i = 0; i < stages - 1; ++i) ch.push_back(1 << (6 + i));
  ch.push_back(1);
  return ch;
}

void init_block(ConvBlock& blk, int in_ch, int out_ch, std::mt19937_64& rng) {
  std::normal_distribution<double> weight_init(0.0, kInitStd);
  blk.w = blk.transposed ? Tensor({in_ch, out_ch, 4, 4, 4}) : Tensor({out_ch, in_ch, 4, 4, 4});
  for (auto& v : blk.w.values) v = float(weight_init(rng));
  blk.b = Tensor({out_ch});
  if (blk.has_bn) {
    blk.bn_scale = Tensor({out_ch});
    std::normal_distribution<double> scale_init(1.0, kInitStd);
    for (auto& v : blk.bn_scale.values) v = float(scale_init(rng));
    blk.bn_shift = Tensor({out_ch});
    blk.bn_mean = Tensor({out_ch});
    blk.bn_var = Tensor({out_ch});
    for (auto& v : blk.bn_var.values) v = 1.0f;
  }
}

struct BlockCache {
  Tensor x;        // conv input
  Tensor pre_act;  // activation input, kept for the relu family
  Tensor y;        // activation output, kept for sigmoid/tanh
  nn::BatchNormCache<float> bn;
};

using NetCache = std::vector<BlockCache>;

Tensor net_forward(std::vector<ConvBlock>& blocks, Tensor x, bool training, bool update_running,
                   NetCache* cache) {
  if (cache) cache->resize(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    ConvBlock& blk = blocks[i];
    BlockCache* bc = cache ? &(*cache)[i] : nullptr;
    if (bc) bc->x = x;
    Tensor h = blk.transposed ? nn::convtranspose3d_forward(x, blk.w, blk.b)
                              : nn::conv3d_forward(x, blk.w, blk.b);
    if (blk.has_bn) {
      h = nn::batchnorm3d_forward(h, blk.bn_scale, blk.bn_shift, blk.bn_mean, blk.bn_var, training,
                                  update_running, bc ? &bc->bn : nullptr);
    }
    switch (blk.act) {
      case Activation::none:
        if (bc) bc->pre_act = Tensor();
        x = std::move(h);
        break;
      case Activation::relu:
        if (bc) bc->pre_act = h;
        x = nn::relu_forward(h);
        break;
      case Activation::leaky_relu:
        if (bc) bc->pre_act = h;
        x = nn::leaky_relu_forward(h, kLeakySlope);
        break;
      case Activation::sigmoid:
        x = nn::sigmoid_forward(h);
        if (bc) bc->y = x;
        break;
      case Activation::tanh_unit:
        x = nn::tanh_forward(h);
        if (bc) bc->y = x;
        break;
    }
  }
  return x;
}

// Returns the gradient with respect to the network input; accumulates
// parameter gradients unless the pass is input-only (generator step
// flowing through a frozen discriminator).
Tensor net_backward(std::vector<ConvBlock>& blocks, const NetCache& cache, Tensor gout,
                    bool accumulate_params) {
  for (std::size_t ri = blocks.size(); ri-- > 0;) {
    ConvBlock& blk = blocks[ri];
    const BlockCache& bc = cache[ri];
    switch (blk.act) {
      case Activation::none: break;
      case Activation::relu: gout = nn::relu_backward(gout, bc.pre_act); break;
      case Activation::leaky_relu: gout = nn::leaky_relu_backward(gout, bc.pre_act, kLeakySlope); break;
      case Activation::sigmoid: gout = nn::sigmoid_backward(gout, bc.y); break;
      case Activation::tanh_unit: gout = nn::tanh_backward(gout, bc.y); break;
    }
    if (blk.has_bn) {
      auto bn_grads = nn::batchnorm3d_backward(gout, blk.bn_scale, bc.bn);
      if (accumulate_params) {
        blk.bn_scale.ensure_grad();
        blk.bn_shift.ensure_grad();
        for (std::size_t c = 0; c < blk.bn_scale.grad.size(); ++c) {
          blk.bn_scale.grad[c] += bn_grads.gscale.values[c];
          blk.bn_shift.grad[c] += bn_grads.gshift.values[c];
        }
      }
      gout = std::move(bn_grads.gx);
    }
    auto grads = blk.transposed ? nn::convtranspose3d_backward(bc.x, blk.w, gout)
                                : nn::conv3d_backward(bc.x, blk.w, gout);
    if (accumulate_params) {
      blk.w.ensure_grad();
      blk.b.ensure_grad();
      for (std::size_t e = 0; e < blk.w.grad.size(); ++e) blk.w.grad[e] += grads.gw.values[e];
      for (std::size_t e = 0; e < blk.b.grad.size(); ++e) blk.b.grad[e] += grads.gb.values[e];
    }
    gout = std::move(grads.gx);
  }
  return gout;
}

std::vector<Tensor*> trainable_params(std::vector<ConvBlock>& blocks) {
  std::vector<Tensor*> out;
  for (auto& blk : blocks) {
    out.push_back(&blk.w);
    out.push_back(&blk.b);
    if (blk.has_bn) {
      out.push_back(&blk.bn_scale);
      out.push_back(&blk.bn_shift);
    }
  }
  return out;
}

// (N,1,S,S,S) + (N,3,1,1,1) -> (N,4,S,S,S) with the coordinates broadcast
// over the volume as channels 1..3.
Tensor concat_condition(const Tensor& cgm_unit, const Tensor& coords) {
  const int batch = cgm_unit.dim(0);
  const int s_d = cgm_unit.dim(2), s_h = cgm_unit.dim(3), s_w = cgm_unit.dim(4);
  require(cgm_unit.dim(1) == 1, ErrorKind::shape_mismatch, "map tensor must have one channel");
  require(coords.shape == std::vector<int>({batch, 3, 1, 1, 1}), ErrorKind::shape_mismatch,
          "coordinate tensor must be (N,3,1,1,1)");
  const std::int64_t vol = std::int64_t(s_d) * s_h * s_w;
  Tensor out({batch, 4, s_d, s_h, s_w});
  for (int n = 0; n < batch; ++n) {
    float* dst = out.data() + std::int64_t(n) * 4 * vol;
    const float* src = cgm_unit.data() + std::int64_t(n) * vol;
    std::copy(src, src + vol, dst);
    for (int c = 0; c < 3; ++c) {
      const float v = coords.values[std::size_t(n) * 3 + c];
      std::fill(dst + (c + 1) * vol, dst + (c + 2) * vol, v);
    }
  }
  return out;
}

Tensor slice_map_grad(const Tensor& g4) {
  const int batch = g4.dim(0);
  const int s_d = g4.dim(2), s_h = g4.dim(3), s_w = g4.dim(4);
  const std::int64_t vol = std::int64_t(s_d) * s_h * s_w;
  Tensor out({batch, 1, s_d, s_h, s_w});
  for (int n = 0; n < batch; ++n) {
    const float* src = g4.data() + std::int64_t(n) * 4 * vol;
    std::copy(src, src + vol, out.data() + std::int64_t(n) * vol);
  }
  return out;
}

bool all_finite(double v) { return std::isfinite(v); }

}  // namespace

GanModel build_gan_model(int side, const Normalizer& norm, const GanHyper& hyper,
                         const Sha256& env_hash) {
  norm.validate();
  require(hyper.lr > 0 && hyper.lambda_re >= 0 && hyper.epochs >= 0, ErrorKind::validation,
          "bad GAN hyperparameters");
  const int stages = stages_for(side);
  GanModel model;
  model.side = side;
  model.norm = norm;
  model.hyper = hyper;
  model.env_hash = env_hash;

  auto rng = make_rng(hyper.seed, Stream::model_init);
  const auto g_ch = generator_channels(stages);
  for (int i = 0; i < stages; ++i) {
    ConvBlock blk;
    blk.transposed = true;
    blk.has_bn = i + 1 < stages;
    blk.act = i + 1 < stages ? Activation::relu : Activation::tanh_unit;
    init_block(blk, g_ch[i], g_ch[i + 1], rng);
    model.gen.push_back(std::move(blk));
  }
  const auto d_ch = discriminator_channels(stages);
  for (int i = 0; i < stages; ++i) {
    ConvBlock blk;
    blk.transposed = false;
    blk.has_bn = i + 1 < stages;
    blk.act = i + 1 < stages ? Activation::leaky_relu : Activation::sigmoid;
    init_block(blk, d_ch[i], d_ch[i + 1], rng);
    model.dis.push_back(std::move(blk));
  }
  validate_architecture(model);
  return model;
}

void validate_architecture(const GanModel& model) {
  model.norm.validate();
  const int stages = stages_for(model.side);
  require(int(model.gen.size()) == stages && int(model.dis.size()) == stages,
          ErrorKind::validation, "stage count does not match grid side");
  const auto g_ch = generator_channels(stages);
  const auto d_ch = discriminator_channels(stages);
  int extent = 1;
  for (int i = 0; i < stages; ++i) {
    const ConvBlock& blk = model.gen[i];
    require(blk.transposed, ErrorKind::validation, "generator stages must be transposed convs");
    require(blk.w.shape == std::vector<int>({g_ch[i], g_ch[i + 1], 4, 4, 4}),
            ErrorKind::validation,
            "generator weight shape mismatch at stage " + std::to_string(i));
    require(blk.b.shape == std::vector<int>({g_ch[i + 1]}), ErrorKind::validation,
            "generator bias shape mismatch");
    require(blk.has_bn == (i + 1 < stages), ErrorKind::validation,
            "generator batchnorm placement mismatch");
    require(blk.act == (i + 1 < stages ? Activation::relu : Activation::tanh_unit),
            ErrorKind::validation, "generator activation mismatch");
    extent = extent * 2;  // stride-2 kernel-4 pad-1 transposed conv doubles the side
  }
  require(extent == model.side, ErrorKind::validation, "generator does not reach the grid side");
  for (int i = 0; i < stages; ++i) {
    const ConvBlock& blk = model.dis[i];
    require(!blk.transposed, ErrorKind::validation, "discriminator stages must be convs");
    require(blk.w.shape == std::vector<int>({d_ch[i + 1], d_ch[i], 4, 4, 4}),
            ErrorKind::validation,
            "discriminator weight shape mismatch at stage " + std::to_string(i));
    require(blk.b.shape == std::vector<int>({d_ch[i + 1]}), ErrorKind::validation,
            "discriminator bias shape mismatch");
    require(blk.has_bn == (i + 1 < stages), ErrorKind::validation,
            "discriminator batchnorm placement mismatch");
    require(blk.act == (i + 1 < stages ? Activation::leaky_relu : Activation::sigmoid),
            ErrorKind::validation, "discriminator activation mismatch");
    extent = extent / 2;  // mirror: each conv halves the side
  }
  require(extent == 1, ErrorKind::validation, "discriminator does not reduce to a scalar");
}

std::int64_t parameter_count(const GanModel& model) {
  std::int64_t n = 0;
  auto add = [&n](const std::vector<ConvBlock>& blocks) {
    for (const auto& blk : blocks) {
      n += blk.w.numel() + blk.b.numel();
      if (blk.has_bn) n += blk.bn_scale.numel() + blk.bn_shift.numel();
    }
  };
  add(model.gen);
  add(model.dis);
  return n;
}

nn::Tensor encode_coordinate(const Point3& o, const Normalizer& norm) {
  norm.validate();
  require(o.x >= 0 && o.x <= norm.extent_x && o.y >= 0 && o.y <= norm.extent_y && o.z >= 0 &&
              o.z <= norm.extent_z,
          ErrorKind::validation, "coordinate outside the normalizer extents");
  Tensor t({1, 3, 1, 1, 1});
  t.values[0] = float(2.0 * o.x / norm.extent_x - 1.0);
  t.values[1] = float(2.0 * o.y / norm.extent_y - 1.0);
  t.values[2] = float(2.0 * o.z / norm.extent_z - 1.0);
  return t;
}

nn::Tensor encode_cgm(const Cgm& cgm, const Normalizer& norm) {
  require(cgm.cell_count() == std::int64_t(cgm.gains_db.size()), ErrorKind::shape_mismatch,
          "CGM tensor size mismatch");
  Tensor t({1, 1, cgm.nz, cgm.ny, cgm.nx});
  const double lo = norm.gain_min_db, hi = norm.gain_max_db;
  for (std::size_t i = 0; i < cgm.gains_db.size(); ++i)
    t.values[i] = float(2.0 * (double(cgm.gains_db[i]) - lo) / (hi - lo) - 1.0);
  return t;
}

std::vector<float> decode_cgm(const nn::Tensor& unit, const Normalizer& norm) {
  const double lo = norm.gain_min_db, hi = norm.gain_max_db;
  std::vector<float> out(unit.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double db = lo + (double(unit.values[i]) + 1.0) * 0.5 * (hi - lo);
    out[i] = float(std::clamp(db, lo, hi));
  }
  return out;
}

nn::Tensor generator_forward(GanModel& model, const nn::Tensor& coords, bool training) {
  return net_forward(model.gen, coords, training, false, nullptr);
}

nn::Tensor discriminator_forward(GanModel& model, const nn::Tensor& cgm_unit,
                                 const nn::Tensor& coords, bool training) {
  return net_forward(model.dis, concat_condition(cgm_unit, coords), training, false, nullptr);
}

double d_loss(GanModel& model, const nn::Tensor& real_unit, const nn::Tensor& coords) {
  Tensor fake = generator_forward(model, coords, true);
  Tensor d_real = discriminator_forward(model, real_unit, coords, true);
  Tensor d_fake = discriminator_forward(model, fake, coords, true);
  return double(nn::lsgan_term(d_real, 1.0f)) + double(nn::lsgan_term(d_fake, 0.0f));
}

double g_loss(GanModel& model, const nn::Tensor& real_unit, const nn::Tensor& coords) {
  Tensor fake = generator_forward(model, coords, true);
  Tensor d_fake = discriminator_forward(model, fake, coords, true);
  return double(nn::lsgan_term(d_fake, 1.0f)) +
         model.hyper.lambda_re * double(nn::mse(fake, real_unit));
}

void train(GanModel& model, const CgmDataset& ds, const TrainProgress& progress) {
  validate_architecture(model);
  require(!ds.train_indices.empty(), ErrorKind::validation, "training split is empty");
  const EnvironmentFile envf = load_dataset_environment(ds);
  const RegionSpec& spec = envf.env.spec;
  require(spec.nx() == model.side && spec.ny() == model.side && spec.nz() == model.side,
          ErrorKind::validation, "dataset grid does not match the model side");
  model.env_hash = ds.env_hash;

  const int train_n = int(ds.train_indices.size());
  const int batch_size =
      model.hyper.batch > 0 ? model.hyper.batch : std::max(1, std::min(16, (train_n + 9) / 10));

  // Preload the whole training split in normalized units.
  std::vector<Tensor> maps, coords;
  maps.reserve(train_n);
  coords.reserve(train_n);
  for (int idx : ds.train_indices) {
    Cgm cgm = load_sample(ds, idx, &spec);
    maps.push_back(encode_cgm(cgm, model.norm));
    coords.push_back(encode_coordinate(cgm.bs, model.norm));
  }
  const std::int64_t vol = std::int64_t(model.side) * model.side * model.side;

  auto g_params = trainable_params(model.gen);
  auto d_params = trainable_params(model.dis);
  nn::AdamState<float> g_state, d_state;
  g_state.lr = d_state.lr = float(model.hyper.lr);
  g_state.beta1 = d_state.beta1 = float(model.hyper.beta1);
  g_state.beta2 = d_state.beta2 = float(model.hyper.beta2);

  auto shuffle_rng = make_rng(model.hyper.seed, Stream::shuffle);
  std::vector<int> order(train_n);
  for (int i = 0; i < train_n; ++i) order[i] = i;

  std::vector<ConvBlock> best_gen = model.gen, best_dis = model.dis;
  double best_recon = std::numeric_limits<double>::infinity();
  model.best_epoch = 0;
  model.loss_trace.clear();
  model.trained_count = train_n;

  for (int epoch = 1; epoch <= model.hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double ep_d = 0, ep_g = 0, ep_re = 0;

    for (int start = 0; start < train_n; start += batch_size) {
      const int bsz = std::min(batch_size, train_n - start);
      Tensor real({bsz, 1, model.side, model.side, model.side});
      Tensor cond({bsz, 3, 1, 1, 1});
      for (int b = 0; b < bsz; ++b) {
        const int s = order[start + b];
        std::copy(maps[s].values.begin(), maps[s].values.end(), real.data() + b * vol);
        std::copy(coords[s].values.begin(), coords[s].values.end(), cond.data() + b * 3);
      }

      // One generator forward feeds both phases; its parameters change
      // only after the backward that consumes these caches.
      NetCache g_cache;
      Tensor fake = net_forward(model.gen, cond, true, true, &g_cache);

      // Discriminator step.
      NetCache d_cache_real, d_cache_fake;
      Tensor d_real = net_forward(model.dis, concat_condition(real, cond), true, true, &d_cache_real);
      Tensor d_fake = net_forward(model.dis, concat_condition(fake, cond), true, false, &d_cache_fake);
      const double loss_d =
          double(nn::lsgan_term(d_real, 1.0f)) + double(nn::lsgan_term(d_fake, 0.0f));
      require(loss_d <= 2.0 + 1e-6, ErrorKind::divergence,
              "discriminator loss exceeded its (0,1)-output bound");
      nn::zero_grads(d_params);
      net_backward(model.dis, d_cache_real, nn::lsgan_backward(d_real, 1.0f), true);
      net_backward(model.dis, d_cache_fake, nn::lsgan_backward(d_fake, 0.0f), true);
      nn::adam_step(d_params, d_state);

      // Generator step against the updated discriminator.
      NetCache d_cache_g;
      Tensor d_fake2 = net_forward(model.dis, concat_condition(fake, cond), true, false, &d_cache_g);
      const double adv = double(nn::lsgan_term(d_fake2, 1.0f));
      const double recon = double(nn::mse(fake, real));
      const double loss_g = adv + model.hyper.lambda_re * recon;
      Tensor g4 = net_backward(model.dis, d_cache_g, nn::lsgan_backward(d_fake2, 1.0f), false);
      Tensor g_fake = slice_map_grad(g4);
      Tensor re_grad = nn::mse_backward(fake, real);
      for (std::size_t i = 0; i < g_fake.values.size(); ++i)
        g_fake.values[i] += float(model.hyper.lambda_re) * re_grad.values[i];
      nn::zero_grads(g_params);
      net_backward(model.gen, g_cache, std::move(g_fake), true);
      nn::adam_step(g_params, g_state);

      require(all_finite(loss_d) && all_finite(loss_g), ErrorKind::divergence,
              "training diverged: non-finite loss");
      ep_d += loss_d * bsz;
      ep_g += loss_g * bsz;
      ep_re += recon * bsz;
    }

    EpochLoss ep{ep_d / train_n, ep_g / train_n, ep_re / train_n};
    model.loss_trace.push_back(ep);
    if (ep.recon < best_recon) {
      best_recon = ep.recon;
      best_gen = model.gen;
      best_dis = model.dis;
      model.best_epoch = epoch;
    }
    if (progress) progress(epoch, ep);
  }

  if (model.best_epoch > 0) {
    model.gen = std::move(best_gen);
    model.dis = std::move(best_dis);
  }
}

Cgm infer(const GanModel& model, const Point3& o) {
  validate_architecture(model);
  Tensor cond = encode_coordinate(o, model.norm);
  // Inference-mode batch norm only reads the running statistics, so the
  // model stays untouched.
  auto& gen = const_cast<std::vector<ConvBlock>&>(model.gen);
  Tensor unit = net_forward(gen, cond, false, false, nullptr);
  Cgm cgm;
  cgm.bs = o;
  cgm.nx = cgm.ny = cgm.nz = model.side;
  cgm.env_hash = model.env_hash;
  cgm.gains_db = decode_cgm(unit, model.norm);
  return cgm;
}

nn::Checkpoint model_to_checkpoint(const GanModel& model) {
  json config;
  config["side"] = model.side;
  config["normalizer"] = {{"gain_min_db", model.norm.gain_min_db},
                          {"gain_max_db", model.norm.gain_max_db},
                          {"extent_x", model.norm.extent_x},
                          {"extent_y", model.norm.extent_y},
                          {"extent_z", model.norm.extent_z}};
  config["hyper"] = {{"lr", model.hyper.lr},       {"beta1", model.hyper.beta1},
                     {"beta2", model.hyper.beta2}, {"lambda_re", model.hyper.lambda_re},
                     {"batch", model.hyper.batch}, {"epochs", model.hyper.epochs},
                     {"seed", model.hyper.seed}};
  config["env_hash"] = to_hex(model.env_hash);
  config["best_epoch"] = model.best_epoch;
  config["trained_count"] = model.trained_count;
  json trace = json::array();
  for (const auto& e : model.loss_trace) trace.push_back({e.d_loss, e.g_loss, e.recon});
  config["loss_trace"] = trace;

  nn::Checkpoint ckpt;
  ckpt.config_json = config.dump();
  auto put_net = [&ckpt](const std::string& prefix, const std::vector<ConvBlock>& blocks) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string base = prefix + "." + std::to_string(i) + ".";
      const ConvBlock& blk = blocks[i];
      ckpt.tensors.emplace_back(base + "w", blk.w);
      ckpt.tensors.emplace_back(base + "b", blk.b);
      if (blk.has_bn) {
        ckpt.tensors.emplace_back(base + "bn_scale", blk.bn_scale);
        ckpt.tensors.emplace_back(base + "bn_shift", blk.bn_shift);
        ckpt.tensors.emplace_back(base + "bn_mean", blk.bn_mean);
        ckpt.tensors.emplace_back(base + "bn_var", blk.bn_var);
      }
    }
  };
  put_net("gen", model.gen);
  put_net("dis", model.dis);
  for (auto& [name, t] : ckpt.tensors) t.grad.clear();
  return ckpt;
}

GanModel model_from_checkpoint(const nn::Checkpoint& ckpt) {
  json config;
  try {
    config = json::parse(ckpt.config_json);
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("checkpoint config is not valid JSON: ") + e.what());
  }
  try {
    Normalizer norm;
    const json& n = config.at("normalizer");
    norm.gain_min_db = n.at("gain_min_db");
    norm.gain_max_db = n.at("gain_max_db");
    norm.extent_x = n.at("extent_x");
    norm.extent_y = n.at("extent_y");
    norm.extent_z = n.at("extent_z");
    GanHyper hyper;
    const json& h = config.at("hyper");
    hyper.lr = h.at("lr");
    hyper.beta1 = h.at("beta1");
    hyper.beta2 = h.at("beta2");
    hyper.lambda_re = h.at("lambda_re");
    hyper.batch = h.at("batch");
    hyper.epochs = h.at("epochs");
    hyper.seed = h.at("seed");

    GanModel model = build_gan_model(config.at("side"), norm, hyper);
    const std::string hex = config.at("env_hash");
    require(hex.size() == 64, ErrorKind::corrupt_file, "checkpoint env_hash malformed");
    for (int i = 0; i < 32; ++i)
      model.env_hash[i] = std::uint8_t(std::stoi(hex.substr(2 * std::size_t(i), 2), nullptr, 16));
    model.best_epoch = config.at("best_epoch");
    model.trained_count = config.at("trained_count");
    for (const auto& e : config.at("loss_trace"))
      model.loss_trace.push_back({e.at(0), e.at(1), e.at(2)});

    auto fill_net = [&ckpt](const std::string& prefix, std::vector<ConvBlock>& blocks) {
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string base = prefix + "." + std::to_string(i) + ".";
        ConvBlock& blk = blocks[i];
        auto fetch = [&](const std::string& name, Tensor& dst) {
          const Tensor* src = ckpt.find(base + name);
          require(src != nullptr, ErrorKind::corrupt_file, "checkpoint missing " + base + name);
          require(src->shape == dst.shape, ErrorKind::shape_mismatch,
                  "checkpoint tensor shape mismatch at " + base + name);
          dst.values = src->values;
        };
        fetch("w", blk.w);
        fetch("b", blk.b);
        if (blk.has_bn) {
          fetch("bn_scale", blk.bn_scale);
          fetch("bn_shift", blk.bn_shift);
          fetch("bn_mean", blk.bn_mean);
          fetch("bn_var", blk.bn_var);
        }
      }
    };
    fill_net("gen", model.gen);
    fill_net("dis", model.dis);
    return model;
  } catch (const json::exception& e) {
    fail(ErrorKind::corrupt_file, std::string("checkpoint config missing fields: ") + e.what());
  }
}

}  // namespace cgmkit
