#pragma once

#include <functional>
#include <string>

namespace fairdef {

using LogSink = std::function<void(const std::string&)>;

// Installs the handler for library warnings and returns the previous one.
// The default writes to stderr.
LogSink set_warning_sink(LogSink sink);

void warn(const std::string& message);

}  // namespace fairdef
