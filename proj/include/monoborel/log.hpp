#pragma once

#include <spdlog/spdlog.h>

namespace monoborel {

/// Shared stderr logger. Its level comes from MONOBOREL_LOG
/// (trace, debug, info, warn, error, off); default warn.
spdlog::logger& logger();

}  // namespace monoborel
