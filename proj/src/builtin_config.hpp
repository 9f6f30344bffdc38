#pragma once

#include <string_view>

// Generated at configure time from config/*.json (see src/builtin_config.cpp.in).
namespace codebench::builtin_config {

extern const std::string_view languages;
extern const std::string_view smells;
extern const std::string_view segments;

}  // namespace codebench::builtin_config
