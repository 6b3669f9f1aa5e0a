#pragma once

namespace hsg {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kTranscriptSchemaVersion = 1;
inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kSnapshotSchemaVersion = 1;

}  // namespace hsg
