#include "vrdf/log.hpp"

#include <iostream>
#include <mutex>

namespace vrdf {

namespace {

std::mutex sink_mutex;

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = s ? std::move(s) : [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  sink()(message);
}

}  // namespace vrdf
