#pragma once

#include <stdexcept>
#include <string>

namespace thzbeam {

// File and serialization failures; the CLI maps these to the "io" category.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent federation payloads.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace thzbeam
