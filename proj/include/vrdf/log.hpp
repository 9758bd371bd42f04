#pragma once

#include <functional>
#include <string_view>

namespace vrdf {

/// Receives non-fatal warnings (display fallbacks, skipped shape components).
/// The default sink writes to stderr.
using WarningSink = std::function<void(std::string_view)>;

void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace vrdf
