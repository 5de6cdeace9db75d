#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tmkit {

struct SourceSpan {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based
  std::size_t length = 1;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::optional<SourceSpan> span;

  bool operator==(const Diagnostic&) const = default;
};

/// Spans of declared elements keyed by id (thimacs, nodes, flow/trigger ids,
/// events), filled by the parser so later passes can point back at the text.
using SourceMap = std::map<std::string, SourceSpan, std::less<>>;

/// "file:line:col: error[CODE]: message"
std::string format_diagnostic(const Diagnostic& d, const std::string& file = {});

bool has_errors(const std::vector<Diagnostic>& diagnostics);

}  // namespace tmkit
