#include "monoborel/errors.hpp"

namespace monoborel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::domain: return "domain";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::degeneracy: return "degeneracy";
    case ErrorKind::not_summable: return "not_summable";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::singular_direction: return "singular_direction";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::conditioning: return "conditioning";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

}  // namespace monoborel
