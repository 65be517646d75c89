#include "mrgc/error.hpp"

namespace mrgc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "ParseError";
    case ErrorKind::invariant: return "InvariantError";
    case ErrorKind::io: return "IoError";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::k_too_large: return "KTooLarge";
    case ErrorKind::k_too_small: return "KTooSmall";
    case ErrorKind::not_symmetric: return "NotSymmetric";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::not_positive_definite: return "NotPositiveDefinite";
    case ErrorKind::dimension: return "DimensionError";
    case ErrorKind::degenerate_cloud: return "DegenerateCloud";
    case ErrorKind::too_few_points: return "TooFewPoints";
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::no_such_edge: return "NoSuchEdge";
    case ErrorKind::disconnected_supports: return "DisconnectedSupports";
    case ErrorKind::single_class: return "SingleClass";
    case ErrorKind::empty_graph: return "EmptyGraph";
    case ErrorKind::config: return "ConfigError";
    case ErrorKind::class_missing: return "ClassMissingInCondensed";
    case ErrorKind::non_finite_loss: return "NonFiniteLoss";
  }
  return "Error";
}

}  // namespace mrgc
