// core/include/revoice/nn/checkpoint.h
#ifndef REVOICE_NN_CHECKPOINT_H_
#define REVOICE_NN_CHECKPOINT_H_

#include <string>

#include "revoice/nn/param.h"

namespace revoice::nn {

// Self-describing binary container: a JSON metadata header followed by raw
// little-endian double blobs for every parameter (value + Adam moments).
// Round-trips are bit-exact.
void save_checkpoint(const std::string& path, const std::string& meta_json,
                     const ParamStore& params);

// Loads into an empty store, creating parameters as recorded. Returns the
// metadata JSON string.
std::string load_checkpoint(const std::string& path, ParamStore& params);

// Reads only the metadata header.
std::string peek_checkpoint_meta(const std::string& path);

}  // namespace revoice::nn

#endif  // REVOICE_NN_CHECKPOINT_H_
