#include "reuseplan/error.hpp"

namespace reuseplan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::config: return "config";
    case ErrorKind::limit: return "limit";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace reuseplan
