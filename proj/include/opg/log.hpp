#pragma once

#include <functional>
#include <string>

namespace opg {

using WarningSink = std::function<void(const std::string&)>;

// Routes non-fatal diagnostics (ungraded items, dropped rows, ...).
// The default sink writes "warning: <msg>" to stderr. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace opg
