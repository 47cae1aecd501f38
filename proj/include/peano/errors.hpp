#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peano {

enum class Errc {
  invalid_argument,
  parse_error,
  not_coprime,
  index_out_of_range,
  depth_too_large,
  non_triadic_bounds,
  divisible_by_three,
  out_of_m,
  no_convergence,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::parse_error: return "ParseError";
    case Errc::not_coprime: return "NotCoprime";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::depth_too_large: return "DepthTooLarge";
    case Errc::non_triadic_bounds: return "NonTriadicBounds";
    case Errc::divisible_by_three: return "DivisibleByThree";
    case Errc::out_of_m: return "OutOfM";
    case Errc::no_convergence: return "NoConvergence";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace peano
