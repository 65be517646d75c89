#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrgc {

enum class ErrorKind {
  parse,
  invariant,
  io,
  dimension_mismatch,
  k_too_large,
  k_too_small,
  not_symmetric,
  no_convergence,
  not_positive_definite,
  dimension,
  degenerate_cloud,
  too_few_points,
  non_finite,
  no_such_edge,
  disconnected_supports,
  single_class,
  empty_graph,
  config,
  class_missing,
  non_finite_loss,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so
/// front ends can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same error with `context: ` prepended to the message.
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace mrgc
