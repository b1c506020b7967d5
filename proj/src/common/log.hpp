#pragma once

#include <functional>
#include <string>

namespace speakgen {

// Process-wide warning channel. Defaults to stderr; tests and embedders can
// redirect it.
using WarningSink = std::function<void(const std::string&)>;

void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace speakgen
