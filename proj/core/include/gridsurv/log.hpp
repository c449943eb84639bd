#pragma once

#include <functional>
#include <string>

namespace gridsurv {

using WarningHandler = std::function<void(const std::string&)>;

// Library warnings go to stderr unless a handler is installed. Returns the
// previous handler so callers (tests) can restore it.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace gridsurv
