#pragma once

#include <vector>

#include "dataset.hpp"

namespace cgmkit {

// Inverse-distance-weighted CGM inference: voxelwise convex combination
// of the k training maps nearest to the target BS coordinate, with
// weights 1/d^p. A zero-distance neighbor is returned verbatim. Distance
// ties break by position in the list.
Cgm idw_infer(const std::vector<const Cgm*>& train_maps, const Point3& target, int k, double p);

// Convenience wrapper that loads the training split from disk.
Cgm idw_infer(const CgmDataset& ds, const Point3& target, int k, double p);

}  // namespace cgmkit
