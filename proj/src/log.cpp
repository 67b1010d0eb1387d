// Copyright (c) 2026 The funnelforge authors
// Use of this source code is governed by the Apache-2.0 license, see LICENSE
#include "funnelforge/log.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace funnelforge::log {

namespace {

std::atomic<int>& current() {
  static std::atomic<int> value = [] {
    const char* env = std::getenv("FUNNELFORGE_LOG");
    return static_cast<int>(env ? parse_level(env) : Level::Warn);
  }();
  return value;
}

const char* tag(Level l) {
  switch (l) {
    case Level::Error: return "error";
    case Level::Warn: return "warn";
    case Level::Info: return "info";
    case Level::Debug: return "debug";
    case Level::Off: break;
  }
  return "";
}

}  // namespace

Level parse_level(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "off" || t == "0") return Level::Off;
  if (t == "error" || t == "1") return Level::Error;
  if (t == "warn" || t == "warning" || t == "2") return Level::Warn;
  if (t == "info" || t == "3") return Level::Info;
  if (t == "debug" || t == "trace" || t == "4") return Level::Debug;
  return Level::Warn;
}

Level level() { return static_cast<Level>(current().load()); }

void set_level(Level l) { current().store(static_cast<int>(l)); }

void write(Level l, const std::string& message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[funnelforge " << tag(l) << "] " << message << '\n';
}

}  // namespace funnelforge::log
