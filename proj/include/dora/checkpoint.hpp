#pragma once

#include <string>

#include "dora/model.hpp"

namespace dora {

// Little-endian binary checkpoint: magic "DORACKPT", u32 version, config
// fields, u8 arm, u64 parameter count, then f64 values in flat layout order.
void save_checkpoint(const ModelParameters& params, const std::string& path);
ModelParameters load_checkpoint(const std::string& path);

}  // namespace dora
