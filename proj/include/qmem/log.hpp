// Copyright 2026 The qmem Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace qmem {

enum class LogLevel { Quiet = 0, Warn = 1, Info = 2, Debug = 3 };

// Level comes from the QMEM_LOG environment variable
// (quiet|warn|info|debug); default warn.
LogLevel log_level();

void log_warn(const std::string& message);
void log_info(const std::string& message);
void log_debug(const std::string& message);

}  // namespace qmem
