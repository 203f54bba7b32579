#pragma once

#include <functional>
#include <string_view>

namespace skm {

/// Receives non-fatal warnings (clamped rates, violated hypotheses, dropped
/// rows). The default handler writes to std::cerr.
using WarningHandler = std::function<void(std::string_view)>;

/// Installs a handler and returns the previous one. Not thread-safe; set it
/// once at start-up.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace skm
