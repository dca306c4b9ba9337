#pragma once

namespace bilrip {

inline constexpr const char* kArtifactName = "bilrip";
inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace bilrip
