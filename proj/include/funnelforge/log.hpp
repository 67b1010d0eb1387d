// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#pragma once

#include <sstream>
#include <string>

namespace funnelforge::log {

enum class Level { Off = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

/// Parsed from FUNNELFORGE_LOG on first use (off|error|warn|info|debug or
/// 0-4); defaults to warn.
Level level();
void set_level(Level l);
Level parse_level(const std::string& text);

void write(Level l, const std::string& message);

template <typename... Args>
void emit(Level l, const Args&... args) {
  if (static_cast<int>(l) > static_cast<int>(level())) return;
  std::ostringstream os;
  (os << ... << args);
  write(l, os.str());
}

template <typename... Args> void error(const Args&... a) { emit(Level::Error, a...); }
template <typename... Args> void warn(const Args&... a) { emit(Level::Warn, a...); }
template <typename... Args> void info(const Args&... a) { emit(Level::Info, a...); }
template <typename... Args> void debug(const Args&... a) { emit(Level::Debug, a...); }

}  // namespace funnelforge::log
