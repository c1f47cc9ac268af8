#pragma once

#include <string>

#include "coformer/config.hpp"
#include "coformer/params.hpp"

namespace coformer {

/// A trained model snapshot.  Parameter values are already quantized to
/// single precision, so saving and reloading reproduces them bit-exactly.
struct Checkpoint {
    RunConfig config;
    ParameterStore params;
};

/// Copy of a store with every value rounded through a 32-bit float.
ParameterStore quantize_f32(const ParameterStore& params);

/// Binary layout: magic "COFO", format version (u32 LE), manifest length
/// (u64 LE), UTF-8 JSON manifest (config snapshot plus ordered parameter
/// records), then the payload of little-endian f32 values.
void save_checkpoint(const ParameterStore& params, const RunConfig& config,
                     const std::string& path);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace coformer
