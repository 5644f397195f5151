#pragma once

#include <functional>
#include <string_view>

namespace framerank {

using WarningHandler = std::function<void(std::string_view)>;

// Emits a warning through the installed handler (stderr by default).
void warn(std::string_view message);

// Replaces the warning handler and returns the previous one. Passing an
// empty function silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace framerank
