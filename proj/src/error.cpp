#include "dgs/error.hpp"

namespace dgs {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "invalid_spec";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::DuplicateId: return "duplicate_id";
    case ErrorKind::DegenerateDistribution: return "degenerate_distribution";
    case ErrorKind::ConstantDistribution: return "constant_distribution";
    case ErrorKind::InvalidThreshold: return "invalid_threshold";
    case ErrorKind::LengthMismatch: return "length_mismatch";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::InsufficientPool: return "insufficient_pool";
    case ErrorKind::MissingClass: return "missing_class";
    case ErrorKind::SpecInfeasible: return "spec_infeasible";
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Validation: return "validation_error";
    case ErrorKind::Io: return "io_error";
  }
  return "error";
}

}  // namespace dgs
