#pragma once

#include <string>
#include <vector>

#include "tmkit/diagnostic.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

struct ValidationReport {
  bool ok = true;
  std::vector<Diagnostic> findings;

  /// Codes of all findings, in report order.
  std::vector<std::string> codes() const;
  bool has(const std::string& code) const;
};

/// FLOW_ADJ, XFER_PAIR, JUNCTION_ARITY, DANGLING, CONTAIN_ACYCLIC (errors) and
/// UNUSED_STORAGE (warning). `spans` attaches source positions when available.
ValidationReport validate_static(const Model& model, const SourceMap* spans = nullptr);

/// EVENT_COVER, EVENT_KNOWN, CHRONO_ACYCLIC, REPEAT_TARGET, ABSENT_REALIZABLE,
/// PRESENT_REALIZABLE (errors) and CHRONO_UNWITNESSED, UNCOVERED_ACTION (warnings).
ValidationReport validate_dynamic(const Model& model, const SourceMap* spans = nullptr);

/// Static findings followed by dynamic ones.
ValidationReport validate_all(const Model& model, const SourceMap* spans = nullptr);

/// {ok, findings:[{severity, code, message, span?}]}
std::string report_json(const ValidationReport& report);

}  // namespace tmkit
