#pragma once

#include <stdexcept>
#include <string>

namespace neuropath {

enum class ErrorCode {
  invalid_channel,
  invalid_factor,
  layer_range,
  bad_magic,
  version_mismatch,
  truncated,
  channel_chain,
  invalid_layer,
  shape,
  domain,
  unsupported,
  mismatched_stacks,
  overflow,
  empty_evaluation,
  io,
  format,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_channel: return "invalid channel count";
    case ErrorCode::invalid_factor: return "invalid subsampling factor";
    case ErrorCode::layer_range: return "layer index out of range";
    case ErrorCode::bad_magic: return "bad magic";
    case ErrorCode::version_mismatch: return "version mismatch";
    case ErrorCode::truncated: return "truncated stream";
    case ErrorCode::channel_chain: return "channel chain mismatch";
    case ErrorCode::invalid_layer: return "invalid layer";
    case ErrorCode::shape: return "shape error";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::unsupported: return "unsupported configuration";
    case ErrorCode::mismatched_stacks: return "mismatched activation stacks";
    case ErrorCode::overflow: return "path count overflow";
    case ErrorCode::empty_evaluation: return "empty evaluation";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::format: return "format error";
  }
  return "unknown error";
}

// Single exception type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace neuropath
