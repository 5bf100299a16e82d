#pragma once

#include "cgan.hpp"
#include "dataset.hpp"
#include "testutil.hpp"

namespace testutil {

// Small 16^3 environment + dataset on disk, shared by the GAN and eval
// tests. Shadowing stays on so the ground truth is non-trivial.
struct DeskFixture {
  TempDir dir;
  cgmkit::EnvironmentFile env;
  cgmkit::CgmDataset ds;

  DeskFixture(const std::string& tag, int count, int test_count, std::uint64_t seed = 1)
      : dir(tag), env(make_env(seed)) {
    auto locations = cgmkit::sample_bs_locations(env.env, count, {0.4, 0.3, 0.3}, seed);
    ds = cgmkit::build_dataset(env, locations, dir.file("ds"), test_count, seed);
  }

  static cgmkit::EnvironmentFile make_env(std::uint64_t seed) {
    cgmkit::RegionSpec spec(128, 128, 64, 8, 8, 4);  // 16^3 cells
    cgmkit::UrbanParams params;
    params.seed = seed;
    // keep the Rayleigh scale proportionate to the 64 m ceiling so the
    // air space above the median roof line stays populated
    params.gamma_h = 20.0;
    return {cgmkit::generate_environment(spec, params), cgmkit::ChannelParams{}};
  }

  cgmkit::Normalizer normalizer() const {
    cgmkit::Normalizer norm;
    norm.gain_min_db = env.channel.gamma_min_db;
    norm.gain_max_db = env.channel.gamma_clip_db;
    norm.extent_x = env.env.spec.length();
    norm.extent_y = env.env.spec.width();
    norm.extent_z = env.env.spec.height();
    return norm;
  }
};

}  // namespace testutil
