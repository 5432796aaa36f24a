#pragma once

#include <string>

#include "common/result.hpp"
#include "platform.hpp"

namespace schoolsense::analytics {

// Dispatch for the `analyze` surface. kind selects the analysis, options is
// a JSON object (documented in docs/formats.md), format is "json" or "csv".
Result<std::string> run_analysis(Platform& platform, const std::string& kind,
                                 const std::string& options_json, const std::string& format);

}  // namespace schoolsense::analytics
