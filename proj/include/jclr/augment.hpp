#pragma once

#include <cstdint>

#include "jclr/types.hpp"
#include "jclr/util.hpp"

namespace jclr {

struct AugmentConfig {
  double detour_frac = 0.1;   // fraction of |tau| replaced by the detour window
  double mask_prob = 0.15;    // per-position drop probability
  double replace_prob = 0.15; // per-position neighbor-swap probability
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct DetourResult {
  Trajectory trajectory;
  bool changed = false;  // false when no alternative route existed
};

/// Replaces a contiguous interior window of about detour_frac*|tau| segments
/// with the shortest alternative route between the window's anchors, searched
/// in the network with the original window segments removed. Origin and
/// destination are always preserved. Returns the input unchanged (flagged)
/// when no alternative exists. Requires |tau| >= 3.
DetourResult detour(const RoadNetwork& network, const Trajectory& traj,
                    const AugmentConfig& cfg, Rng& rng);

/// Independently drops each interior position with probability mask_prob.
/// Endpoints are always kept. Requires |tau| >= 3.
Trajectory mask_segments(const Trajectory& traj, const AugmentConfig& cfg, Rng& rng);

/// Independently replaces each interior position with probability
/// replace_prob by a uniformly chosen structural out-neighbor of the original
/// segment (left unchanged if it has none). Requires |tau| >= 3.
Trajectory replace_segments(const RoadNetwork& network, const Trajectory& traj,
                            const AugmentConfig& cfg, Rng& rng);

/// Applies one augmentation chosen uniformly among detour, mask and replace,
/// producing the noisy positive view of `traj`.
Trajectory noisy_view(const RoadNetwork& network, const Trajectory& traj,
                      const AugmentConfig& cfg, Rng& rng);

}  // namespace jclr
