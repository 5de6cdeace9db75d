#pragma once

// Concrete `.tm` syntax: parser and canonical printer.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/diagnostic.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

struct ParseResult {
  std::optional<Model> model;  // set iff diagnostics hold no Error
  std::vector<Diagnostic> diagnostics;
  SourceMap spans;

  bool ok() const { return model.has_value(); }
};

ParseResult parse_model(std::string_view source);

/// Canonical text: two-space indentation, one item per line, thimacs first and
/// then flows, triggers, events, one chronology block, focus groups.
/// Implicit creates are omitted.
std::string render_model(const Model& model);

/// Reads a file and parses it; a missing file yields a single "Io" error.
ParseResult parse_file(const std::string& path);

}  // namespace tmkit
