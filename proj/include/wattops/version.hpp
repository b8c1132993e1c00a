#pragma once

namespace wattops {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kScenarioSchema = "wattops-scenario/1";

}  // namespace wattops
