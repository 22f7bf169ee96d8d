#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drs/errors.hpp"

namespace drs::synth {

// Generated experiment bundle: a panel, its group mapping, and a ready-to-run
// config referring to both by bare filename.
struct Bundle {
  std::string panel_file;
  std::string groups_file;
  std::string config_file;
};

std::vector<std::string> preset_names();

// Writes panel.csv, groups.txt and experiment.ini for the named preset under
// out_dir. Output is a pure function of (preset, seed).
//
// Presets:
//   smoke    small panel (3 groups x 2), quick end-to-end runs
//   desk     medium panel (8 groups x 4), horizons 1 and 3
//   ordering panel whose structure favors dynamic density combination:
//            group-specific persistent signals with drifting weights, a
//            dominant common factor in the predictors, and a volatility
//            break, so no single baseline keeps up across the sample
Bundle generate(const std::string& preset, const std::string& out_dir,
                std::uint64_t seed);

}  // namespace drs::synth
