#pragma once

#include <string>
#include <string_view>

#include "tmkit/model.hpp"

namespace tmkit {

enum class DotLevel { Static, Dynamic };

/// Static level: thimacs as nested clusters, solid flows, dashed triggers,
/// cylinder storages. Dynamic level: one cluster per event grouping its nodes
/// (a node shared by several events sits in the first one). Throws NoEvents
/// for the dynamic level of an eventless model.
std::string export_dot(const Model& model, DotLevel level = DotLevel::Static);

/// {name, thimacs[], actions[], flows[], triggers[], storages[], junctions[]}
/// plus events[], chronology[] and focus[] when the model has any events.
std::string export_json(const Model& model);

/// Inverse of export_json. Throws MalformedJson on schema errors, UnknownId and
/// DuplicateId on broken references, InvalidKind on an unknown action kind.
Model import_json(std::string_view text);

}  // namespace tmkit
