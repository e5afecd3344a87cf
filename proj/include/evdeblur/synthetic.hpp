#pragma once

#include <cstdint>

#include "evdeblur/simulator.hpp"

namespace evd {

// Deterministic smooth test scene: a band-limited sinusoidal texture
// translating diagonally, intensities inside [0.2, 0.8]. The drift covers
// shift_frac of the width over the clip duration. Used by the invariant
// suite and the CLI `check` subcommand.
struct SceneSpec {
  int width = 64;
  int height = 64;
  int frames = 200;
  double duration = 1.0;
  int channels = 1;
  double shift_frac = 0.25;  // total drift as a fraction of the width
};

SharpVideo make_scene(const SceneSpec& spec);

}  // namespace evd
