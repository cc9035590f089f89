// Minimal stderr logging gated by the COALESCE_LOG env var (error|info|debug).

#pragma once

#include <string>

namespace coalesce::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level level();

void error(const std::string& msg);
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace coalesce::log
