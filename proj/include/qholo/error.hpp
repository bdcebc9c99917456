#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qholo {

enum class Errc {
  invalid_argument,
  grid_mismatch,
  plane_mismatch,
  degenerate_input,
  low_snr,
  format_error,
  io_error,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::grid_mismatch: return "grid_mismatch";
    case Errc::plane_mismatch: return "plane_mismatch";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::low_snr: return "low_snr";
    case Errc::format_error: return "format_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

/// Every failure in the library surfaces as this exception. The code is
/// stable and is what the CLI prints as the machine-parsable error token.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace qholo
