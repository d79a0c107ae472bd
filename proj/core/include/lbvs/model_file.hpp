#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lbvs/calibration.hpp"
#include "lbvs/net.hpp"

namespace lbvs {

/// A trained model together with the camera it was calibrated on and the
/// pixel region its training data covered.
struct ModelFile {
  InteractionNet net;
  std::uint64_t camera_fingerprint = 0;
  CoverageHull hull;
};

inline constexpr char kModelMagic[8] = {'L', 'B', 'V', 'S', 'N', 'E', 'T', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

/// Little-endian binary encoding; see docs/model_format.md.
std::string encode_model(const ModelFile& model);
ModelFile decode_model(const std::string& bytes);

void save_model(const std::filesystem::path& path, const ModelFile& model);
/// Throws kIo when unreadable and kCorruptModel for bad magic, version,
/// architecture, truncation or non-finite values.
ModelFile load_model(const std::filesystem::path& path);

}  // namespace lbvs
