#pragma once

#include <stdexcept>
#include <string>

namespace echosim {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotFoundError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct TooSmallError : Error { using Error::Error; };
struct TooFewPointsError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };

// A template placeholder that was not bound at render time.
struct TemplateError : Error {
  explicit TemplateError(const std::string& name)
      : Error("unbound placeholder: {" + name + "}"), placeholder(name) {}
  std::string placeholder;
};

// Checkpoint series that do not line up across seeds.
struct AlignmentError : Error {
  AlignmentError(const std::string& file_, const std::string& detail)
      : Error("checkpoint misalignment in " + file_ + ": " + detail), file(file_) {}
  std::string file;
};

// Network-level failure after retries were exhausted.
struct TransportError : Error { using Error::Error; };

// Non-retryable HTTP status from the completion endpoint.
struct ApiError : Error {
  ApiError(int status_, const std::string& excerpt)
      : Error("api error, status " + std::to_string(status_) + ": " + excerpt),
        status(status_), body_excerpt(excerpt) {}
  int status;
  std::string body_excerpt;
};

}  // namespace echosim
