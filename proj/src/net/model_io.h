// net/model_io.h
//
// Binary model files.  A file holds everything enhancement needs: layer
// weights, input normalization, the analysis/feature configuration the model
// was trained with, and training provenance.  Layout is little-endian,
// weights stored as float64 row-major, and the file ends with a CRC-32 of
// all preceding bytes so truncation and corruption are detected on load.

#ifndef DEMIST_NET_MODEL_IO_H_
#define DEMIST_NET_MODEL_IO_H_

#include <cstdint>
#include <string>

#include "net/mlp.h"

namespace demist {

void save_model(const Mlp<float>& model, const std::string& path);
Mlp<float> load_model(const std::string& path);

// CRC-32 (IEEE, reflected 0xEDB88320), exposed for tests.
std::uint32_t crc32_bytes(const void* data, std::size_t size);

}  // namespace demist

#endif  // DEMIST_NET_MODEL_IO_H_
