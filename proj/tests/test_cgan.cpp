#include "cgan.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nn/checkpoint.hpp"
#include "pipeline_fixture.hpp"

using namespace cgmkit;

namespace {

Normalizer paper_norm() {
  Normalizer n;
  n.extent_x = 256.0;
  n.extent_y = 256.0;
  n.extent_z = 128.0;
  return n;
}

}  // namespace

TEST_CASE("coordinate encoding maps the region onto [-1,1]^3") {
  const Normalizer norm = paper_norm();
  auto mid = encode_coordinate({128, 128, 64}, norm);
  CHECK(mid.shape == std::vector<int>({1, 3, 1, 1, 1}));
  CHECK(mid.values == std::vector<float>({0.0f, 0.0f, 0.0f}));
  CHECK(encode_coordinate({0, 0, 0}, norm).values == std::vector<float>({-1, -1, -1}));
  CHECK(encode_coordinate({256, 256, 128}, norm).values == std::vector<float>({1, 1, 1}));
  CHECK_THROWS_AS(encode_coordinate({300, 0, 0}, norm), Error);
}

TEST_CASE("gain encoding is the declared affine map and decode clamps") {
  const Normalizer norm = paper_norm();
  Cgm cgm;
  cgm.nx = cgm.ny = cgm.nz = 1;
  cgm.gains_db = {-250.0f};
  CHECK(encode_cgm(cgm, norm).values[0] == doctest::Approx(-1.0));
  cgm.gains_db = {-70.0f};
  CHECK(encode_cgm(cgm, norm).values[0] == doctest::Approx(1.0));
  cgm.gains_db = {-160.0f};
  CHECK(encode_cgm(cgm, norm).values[0] == doctest::Approx(0.0));

  nn::Tensor over({1, 1, 1, 1, 2});
  over.values = {1.5f, -2.0f};
  auto decoded = decode_cgm(over, norm);
  CHECK(decoded[0] == float(norm.gain_max_db));
  CHECK(decoded[1] == float(norm.gain_min_db));
}

TEST_CASE("encode/decode round-trips a random map within f32 rounding") {
  std::mt19937_64 rng(12);
  const Normalizer norm = paper_norm();
  Cgm cgm;
  cgm.nx = cgm.ny = cgm.nz = 8;
  cgm.gains_db.resize(512);
  std::uniform_real_distribution<double> dist(-250.0, -70.0);
  for (auto& g : cgm.gains_db) g = float(dist(rng));
  auto decoded = decode_cgm(encode_cgm(cgm, norm), norm);
  double worst = 0.0;
  for (std::size_t i = 0; i < decoded.size(); ++i)
    worst = std::max(worst, std::abs(double(decoded[i]) - double(cgm.gains_db[i])));
  CHECK(worst < 1e-3);
}

TEST_CASE("architecture contract holds for both grid scales") {
  const GanHyper hyper;
  for (int side : {16, 32}) {
    GanModel model = build_gan_model(side, paper_norm(), hyper);
    const int stages = side == 16 ? 4 : 5;
    REQUIRE(int(model.gen.size()) == stages);
    REQUIRE(int(model.dis.size()) == stages);
    // first generator stage widens to 2^(4+stages); discriminator mirrors
    CHECK(model.gen[0].w.dim(0) == 3);
    CHECK(model.gen[0].w.dim(1) == (1 << (4 + stages)));
    CHECK(model.gen.back().w.dim(1) == 1);
    CHECK(model.dis[0].w.dim(1) == 4);
    CHECK(model.dis.back().w.dim(0) == 1);

    nn::Tensor coords = encode_coordinate({10, 20, 30}, paper_norm());
    nn::Tensor out = generator_forward(model, coords, false);
    CHECK(out.shape == std::vector<int>({1, 1, side, side, side}));
    for (float v : out.values) {
      REQUIRE(std::isfinite(v));
      REQUIRE(v > -1.0f);
      REQUIRE(v < 1.0f);
    }

    nn::Tensor d = discriminator_forward(model, out, coords, false);
    CHECK(d.shape == std::vector<int>({1, 1, 1, 1, 1}));
    CHECK(d.values[0] > 0.0f);
    CHECK(d.values[0] < 1.0f);

    // same input, same weights -> identical output
    CHECK(generator_forward(model, coords, false).values == out.values);
  }
  CHECK_THROWS_AS(build_gan_model(12, paper_norm(), hyper), Error);
  CHECK_THROWS_AS(build_gan_model(8, paper_norm(), hyper), Error);
}

TEST_CASE("generator layer shapes follow the 512-256-128-64-1 taper") {
  GanModel model = build_gan_model(32, paper_norm(), GanHyper{});
  const int widths[5] = {512, 256, 128, 64, 1};
  for (int i = 0; i < 5; ++i) {
    CHECK(model.gen[i].w.dim(1) == widths[i]);
    CHECK(model.dis[i].w.dim(0) == (i == 4 ? 1 : widths[3 - i]));
  }
}

TEST_CASE("discriminator rejects inputs that are not 4-channel assemblies") {
  GanModel model = build_gan_model(16, paper_norm(), GanHyper{});
  nn::Tensor bad_map({1, 2, 16, 16, 16});
  nn::Tensor coords = encode_coordinate({1, 2, 3}, paper_norm());
  CHECK_THROWS_AS(discriminator_forward(model, bad_map, coords, false), Error);
  nn::Tensor bad_coords({1, 2, 1, 1, 1});
  nn::Tensor map({1, 1, 16, 16, 16});
  CHECK_THROWS_AS(discriminator_forward(model, map, bad_coords, false), Error);
}

TEST_CASE("batch order only permutes discriminator outputs") {
  std::mt19937_64 rng(5);
  GanModel model = build_gan_model(16, paper_norm(), GanHyper{});
  auto maps = testutil::random_tensor<float>({3, 1, 16, 16, 16}, rng);
  nn::Tensor coords({3, 3, 1, 1, 1});
  for (auto& v : coords.values) v = float(std::uniform_real_distribution<double>(-1, 1)(rng));

  nn::Tensor out = discriminator_forward(model, maps, coords, false);

  // swap samples 0 and 2
  auto swap_batch = [](nn::Tensor t, int a, int b) {
    const std::int64_t stride = t.numel() / t.dim(0);
    for (std::int64_t i = 0; i < stride; ++i)
      std::swap(t.values[a * stride + i], t.values[b * stride + i]);
    return t;
  };
  nn::Tensor out_swapped =
      discriminator_forward(model, swap_batch(maps, 0, 2), swap_batch(coords, 0, 2), false);
  CHECK(out.values[0] == out_swapped.values[2]);
  CHECK(out.values[2] == out_swapped.values[0]);
  CHECK(out.values[1] == out_swapped.values[1]);
}

TEST_CASE("loss evaluations are nonnegative and d_loss is bounded by 2") {
  testutil::DeskFixture fx("cganloss", 8, 2, 31);
  GanModel model = build_gan_model(16, fx.normalizer(), GanHyper{});
  Cgm cgm = load_sample(fx.ds, 0);
  nn::Tensor real = encode_cgm(cgm, model.norm);
  nn::Tensor coords = encode_coordinate(cgm.bs, model.norm);
  const double d = d_loss(model, real, coords);
  const double g = g_loss(model, real, coords);
  CHECK(d >= 0.0);
  CHECK(d <= 2.0);
  CHECK(g >= 0.0);
}

TEST_CASE("training is deterministic, tracks losses, and snapshots the best epoch") {
  testutil::DeskFixture fx("cgantrain", 6, 2, 7);
  GanHyper hyper;
  hyper.epochs = 6;
  hyper.batch = 4;
  hyper.seed = 3;

  auto run = [&] {
    GanModel model = build_gan_model(16, fx.normalizer(), hyper);
    train(model, fx.ds);
    return nn::serialize_checkpoint(model_to_checkpoint(model));
  };
  const std::string a = run();
  const std::string b = run();
  CHECK(a == b);  // bit-identical checkpoints for a fixed seed

  GanModel model = model_from_checkpoint(nn::deserialize_checkpoint(a));
  REQUIRE(model.loss_trace.size() == 6);
  for (const auto& e : model.loss_trace) {
    CHECK(std::isfinite(e.d_loss));
    CHECK(std::isfinite(e.g_loss));
    CHECK(e.d_loss >= 0.0);
    CHECK(e.d_loss <= 2.0);
    CHECK(e.recon >= 0.0);
  }
  CHECK(model.best_epoch >= 1);
  CHECK(model.best_epoch <= 6);
  const double best = model.loss_trace[model.best_epoch - 1].recon;
  for (const auto& e : model.loss_trace) CHECK(best <= e.recon + 1e-12);
}

TEST_CASE("reconstruction loss falls on a small training set") {
  testutil::DeskFixture fx("cganfit", 4, 0, 13);
  GanHyper hyper;
  hyper.epochs = 40;
  hyper.batch = 4;
  hyper.seed = 5;
  GanModel model = build_gan_model(16, fx.normalizer(), hyper);
  train(model, fx.ds);
  REQUIRE(model.loss_trace.size() == 40);
  const double first = model.loss_trace.front().recon;
  double lowest = first;
  for (const auto& e : model.loss_trace) lowest = std::min(lowest, e.recon);
  CHECK(lowest < first / 3.0);
}

TEST_CASE("training refuses an empty split and non-cubic grids") {
  testutil::DeskFixture fx("cganbad", 4, 0, 17);
  GanModel model = build_gan_model(16, fx.normalizer(), GanHyper{});
  CgmDataset empty_split = split_dataset(fx.ds, 0, 1);
  CHECK_THROWS_AS(train(model, empty_split), Error);
}

TEST_CASE("inference decodes into the physical range and ignores the discriminator") {
  testutil::DeskFixture fx("cganinfer", 6, 2, 23);
  GanHyper hyper;
  hyper.epochs = 2;
  hyper.batch = 3;
  GanModel model = build_gan_model(16, fx.normalizer(), hyper);
  train(model, fx.ds);

  const Point3 o{52.0, 12.0, 30.0};
  Cgm out = infer(model, o);
  CHECK(out.bs == o);
  CHECK(out.nx == 16);
  CHECK(out.cell_count() == std::int64_t(out.gains_db.size()));
  CHECK(out.env_hash == fx.ds.env_hash);
  for (float g : out.gains_db) {
    CHECK(g >= float(model.norm.gain_min_db));
    CHECK(g <= float(model.norm.gain_max_db));
  }

  // poisoning every discriminator parameter must not change inference
  GanModel poisoned = model;
  for (auto& blk : poisoned.dis) {
    for (auto& v : blk.w.values) v = std::nanf("");
    for (auto& v : blk.b.values) v = std::nanf("");
  }
  CHECK(infer(poisoned, o).gains_db == out.gains_db);

  CHECK_THROWS_AS(infer(model, {500.0, 0.0, 0.0}), Error);
}

TEST_CASE("checkpoints round-trip the whole model") {
  testutil::DeskFixture fx("cganckpt", 5, 1, 29);
  GanHyper hyper;
  hyper.epochs = 3;
  hyper.batch = 2;
  hyper.lambda_re = 50.0;
  GanModel model = build_gan_model(16, fx.normalizer(), hyper);
  train(model, fx.ds);

  const std::string bytes = nn::serialize_checkpoint(model_to_checkpoint(model));
  GanModel back = model_from_checkpoint(nn::deserialize_checkpoint(bytes));
  CHECK(back.side == model.side);
  CHECK(back.norm == model.norm);
  CHECK(back.hyper == model.hyper);
  CHECK(back.env_hash == model.env_hash);
  CHECK(back.best_epoch == model.best_epoch);
  for (std::size_t i = 0; i < model.gen.size(); ++i) {
    CHECK(back.gen[i].w.values == model.gen[i].w.values);
    CHECK(back.gen[i].b.values == model.gen[i].b.values);
    if (model.gen[i].has_bn) {
      CHECK(back.gen[i].bn_mean.values == model.gen[i].bn_mean.values);
      CHECK(back.gen[i].bn_var.values == model.gen[i].bn_var.values);
    }
  }
  // identical inference behavior
  const Point3 o{20.0, 84.0, 10.0};
  CHECK(infer(back, o).gains_db == infer(model, o).gains_db);

  // damage -> corrupt-file error
  std::string mangled = bytes;
  mangled[2] = 'x';
  CHECK_THROWS_AS(nn::deserialize_checkpoint(mangled), Error);
  CHECK_THROWS_AS(nn::deserialize_checkpoint(bytes.substr(0, bytes.size() - 9)), Error);
}
