#include "mvjl/errors.hpp"

namespace mvjl {

const char* to_string(ParseErrorKind kind) noexcept {
  switch (kind) {
    case ParseErrorKind::kMalformed: return "malformed";
    case ParseErrorKind::kMissingCell: return "missing cell";
    case ParseErrorKind::kNodeOutOfRange: return "node out of range";
    case ParseErrorKind::kSelfLoop: return "self loop";
    case ParseErrorKind::kNonFinite: return "non-finite weight";
    case ParseErrorKind::kDuplicateRow: return "duplicate row";
    case ParseErrorKind::kUnknownSubject: return "unknown subject";
    case ParseErrorKind::kDimensionMismatch: return "dimension mismatch";
  }
  return "unknown";
}

namespace {
std::string format_parse_error(ParseErrorKind kind, const std::string& file, std::size_t line,
                               const std::string& detail) {
  std::string out = file;
  if (line > 0) out += ":" + std::to_string(line);
  out += ": ";
  out += to_string(kind);
  if (!detail.empty()) out += ": " + detail;
  return out;
}
}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::string file, std::size_t line, const std::string& detail)
    : std::runtime_error(format_parse_error(kind, file, line, detail)),
      kind_(kind),
      file_(std::move(file)),
      line_(line) {}

}  // namespace mvjl
