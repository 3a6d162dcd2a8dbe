#pragma once

#include <stdexcept>
#include <string>

namespace erpflow {

struct ZeroVector : std::runtime_error {
  explicit ZeroVector(const std::string& msg) : std::runtime_error("ZeroVector: " + msg) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& msg) : std::runtime_error("DimensionMismatch: " + msg) {}
};

struct ViewMismatch : std::runtime_error {
  explicit ViewMismatch(const std::string& msg) : std::runtime_error("ViewMismatch: " + msg) {}
};

struct EmptyRegion : std::runtime_error {
  explicit EmptyRegion(const std::string& msg) : std::runtime_error("EmptyRegion: " + msg) {}
};

struct BadMagic : std::runtime_error {
  explicit BadMagic(const std::string& msg) : std::runtime_error("BadMagic: " + msg) {}
};

struct TruncatedFile : std::runtime_error {
  explicit TruncatedFile(const std::string& msg) : std::runtime_error("TruncatedFile: " + msg) {}
};

struct SizeMismatch : std::runtime_error {
  explicit SizeMismatch(const std::string& msg) : std::runtime_error("SizeMismatch: " + msg) {}
};

}  // namespace erpflow
