#pragma once

#include <cstdint>
#include <string>

#include "ace/model.hpp"

namespace ace {

// Flat binary dump of every parameter array (name, shape header, raw 64-bit
// values) plus the configuration hash. Round-trips bitwise.
void save_checkpoint(const std::string& path, AceModel& model, std::uint64_t config_hash);

// Restores parameter values in place; names and shapes must match the model.
// Returns the stored configuration hash.
std::uint64_t load_checkpoint(const std::string& path, AceModel& model);

}  // namespace ace
