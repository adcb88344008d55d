#pragma once

#include <string>
#include <vector>

namespace advbot {

// Collects non-fatal warnings from an operation. Pass nullptr to discard.
struct Diagnostics {
  std::vector<std::string> warnings;
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag) diag->warnings.push_back(std::move(message));
}

}  // namespace advbot
