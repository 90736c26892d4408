#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace choquard {

/// Raised on contract violations (bad parameters, mismatched grids).
class Error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline thread_local std::vector<std::string>* warning_capture = nullptr;
}

/// Non-fatal numerical warnings. Printed to stderr unless a
/// WarningCapture is active on the calling thread.
inline void warn(std::string message) {
  if (detail::warning_capture != nullptr) {
    detail::warning_capture->push_back(std::move(message));
    return;
  }
  std::cerr << "warning: " << message << '\n';
}

/// Collects warnings raised on this thread for the lifetime of the object.
class WarningCapture {
 public:
  WarningCapture() : previous_(detail::warning_capture) { detail::warning_capture = &messages_; }
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;
  ~WarningCapture() { detail::warning_capture = previous_; }

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(const std::string& needle) const {
    for (const auto& m : messages_)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }

 private:
  std::vector<std::string> messages_;
  std::vector<std::string>* previous_;
};

}  // namespace choquard
