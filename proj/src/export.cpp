#include "tmkit/export.hpp"

#include <set>
#include <sstream>

#include <json.hpp>

#include "tmkit/dynamics.hpp"

namespace tmkit {

namespace {

std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string local_name(const std::string& id) { return id.substr(id.rfind('.') + 1); }

class DotWriter {
 public:
  explicit DotWriter(const Model& model) : m_(model) {}

  std::string run(DotLevel level) {
    out_ << "digraph " << dot_quote(m_.name) << " {\n";
    if (level == DotLevel::Static) {
      for (const auto& t : m_.thimacs) {
        if (!t.parent) thimac(t, 1);
      }
    } else {
      events();
    }
    edges();
    out_ << "}\n";
    return out_.str();
  }

 private:
  std::ostream& indent(int depth) {
    for (int i = 0; i < depth; ++i) out_ << "  ";
    return out_;
  }

  void node(const std::string& id, int depth) {
    auto ref = m_.find(id);
    if (!ref) return;
    indent(depth) << dot_quote(id) << " [";
    switch (ref->kind) {
      case ElementRef::Kind::Action: {
        const auto& a = m_.actions[ref->index];
        std::string label = std::string(to_string(a.kind)) + ": " + local_name(a.id);
        if (a.guard) label += "\n[" + std::string(a.guard->negated ? "!" : "") + a.guard->input + "]";
        out_ << "shape=box, label=" << dot_quote(label);
        if (a.implicit) out_ << ", style=dotted";
        break;
      }
      case ElementRef::Kind::Storage:
        out_ << "shape=cylinder, label=" << dot_quote(local_name(id));
        break;
      case ElementRef::Kind::Junction:
        out_ << "shape=diamond, label="
             << dot_quote(to_string(m_.junctions[ref->index].mode));
        break;
      case ElementRef::Kind::Thimac: break;
    }
    out_ << "];\n";
  }

  void thimac(const Thimac& t, int depth) {
    indent(depth) << "subgraph " << dot_quote("cluster_" + t.id) << " {\n";
    std::string label = t.name;
    if (!t.realizable) label += " (unrealizable)";
    indent(depth + 1) << "label=" << dot_quote(label) << ";\n";
    for (const auto& child : t.children) {
      if (const Thimac* sub = m_.find_thimac(child)) {
        thimac(*sub, depth + 1);
      } else {
        node(child, depth + 1);
      }
    }
    indent(depth) << "}\n";
  }

  void events() {
    std::set<std::string> placed;
    for (const auto& e : m_.events) {
      indent(1) << "subgraph " << dot_quote("cluster_event_" + e.id) << " {\n";
      std::string label = e.id;
      if (!e.label.empty()) label += ": " + e.label;
      indent(2) << "label=" << dot_quote(label) << ";\n";
      if (e.polarity == Polarity::Absent) indent(2) << "style=dashed;\n";
      for (const auto& n : covered_nodes(m_, e)) {
        if (placed.insert(n).second) node(n, 2);
      }
      indent(1) << "}\n";
    }
    for (const auto& n : m_.nodes_in_order()) {
      if (!placed.contains(n)) node(n, 1);
    }
  }

  void edges() {
    for (const auto& f : m_.flows) indent(1) << dot_quote(f.from) << " -> " << dot_quote(f.to) << ";\n";
    for (const auto& t : m_.triggers)
      indent(1) << dot_quote(t.from) << " -> " << dot_quote(t.to) << " [style=dashed];\n";
  }

  const Model& m_;
  std::ostringstream out_;
};

using json = nlohmann::ordered_json;

json edge_json(const std::string& id, const std::string& from, const std::string& to) {
  return {{"id", id}, {"from", from}, {"to", to}};
}

[[noreturn]] void malformed(const std::string& what) {
  throw ModelError(ErrorCode::MalformedJson, "malformed model JSON: " + what);
}

template <typename T>
T field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) malformed(std::string("missing '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    malformed(std::string("bad '") + key + "'");
  }
}

const json& array_field(const json& doc, const char* key, bool required) {
  static const json empty = json::array();
  if (!doc.contains(key)) {
    if (required) malformed(std::string("missing '") + key + "'");
    return empty;
  }
  const json& value = doc.at(key);
  if (!value.is_array()) malformed(std::string("'") + key + "' is not an array");
  return value;
}

}  // namespace

std::string export_dot(const Model& model, DotLevel level) {
  if (level == DotLevel::Dynamic && model.events.empty())
    throw ModelError(ErrorCode::NoEvents, "dynamic export needs at least one event");
  return DotWriter(model).run(level);
}

std::string export_json(const Model& model) {
  json doc;
  doc["name"] = model.name;
  doc["thimacs"] = json::array();
  for (const auto& t : model.thimacs) {
    json item{{"id", t.id}, {"name", t.name}};
    if (t.parent) item["parent"] = *t.parent;
    item["realizable"] = t.realizable;
    item["delimiter"] = t.delimiter;
    item["children"] = t.children;
    doc["thimacs"].push_back(std::move(item));
  }
  doc["actions"] = json::array();
  for (const auto& a : model.actions) {
    json item{{"id", a.id}, {"kind", to_string(a.kind)}, {"owner", a.owner}, {"label", a.label}};
    if (a.implicit) item["implicit"] = true;
    if (a.guard) item["guard"] = {{"input", a.guard->input}, {"negated", a.guard->negated}};
    doc["actions"].push_back(std::move(item));
  }
  doc["flows"] = json::array();
  for (const auto& f : model.flows) doc["flows"].push_back(edge_json(f.id, f.from, f.to));
  doc["triggers"] = json::array();
  for (const auto& t : model.triggers) doc["triggers"].push_back(edge_json(t.id, t.from, t.to));
  doc["storages"] = json::array();
  for (const auto& s : model.storages)
    doc["storages"].push_back({{"id", s.id}, {"owner", s.owner}, {"label", s.label}});
  doc["junctions"] = json::array();
  for (const auto& j : model.junctions)
    doc["junctions"].push_back({{"id", j.id}, {"owner", j.owner}, {"mode", to_string(j.mode)}});

  if (!model.events.empty()) {
    doc["events"] = json::array();
    for (const auto& e : model.events) {
      json item{{"id", e.id}, {"label", e.label}, {"covers", e.covers},
                {"polarity", to_string(e.polarity)}};
      if (e.duration) item["duration"] = {{"magnitude", e.duration->magnitude}, {"unit", e.duration->unit}};
      if (e.tense) item["tense"] = to_string(*e.tense);
      doc["events"].push_back(std::move(item));
    }
    doc["chronology"] = json::array();
    for (const auto& c : model.chronology)
      doc["chronology"].push_back({{"from", c.from}, {"to", c.to}, {"kind", to_string(c.kind)}});
    // Informational only; import recomputes it from the static edges.
    try {
      json derived = json::array();
      for (const auto& c : derive_chronology(model).edges)
        derived.push_back({{"from", c.from}, {"to", c.to}, {"kind", to_string(c.kind)}});
      doc["derived_chronology"] = std::move(derived);
    } catch (const ModelError&) {
    }
    doc["focus"] = json::array();
    for (const auto& g : model.focus) doc["focus"].push_back({{"name", g.name}, {"events", g.events}});
  }
  return doc.dump(2) + "\n";
}

Model import_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  if (!doc.is_object()) malformed("top level is not an object");

  Model model;
  model.name = field<std::string>(doc, "name");
  if (model.name.empty()) throw ModelError(ErrorCode::InvalidName, "model name must be nonempty");

  for (const auto& item : array_field(doc, "thimacs", true)) {
    Thimac t;
    t.id = field<std::string>(item, "id");
    t.name = field<std::string>(item, "name");
    if (item.contains("parent")) t.parent = field<std::string>(item, "parent");
    t.realizable = field<bool>(item, "realizable");
    t.delimiter = item.contains("delimiter") && field<bool>(item, "delimiter");
    t.children = field<std::vector<std::string>>(item, "children");
    model.thimacs.push_back(std::move(t));
  }
  for (const auto& item : array_field(doc, "actions", true)) {
    ActionNode a;
    a.id = field<std::string>(item, "id");
    a.kind = parse_action_kind(field<std::string>(item, "kind"));
    a.owner = field<std::string>(item, "owner");
    a.label = field<std::string>(item, "label");
    a.implicit = item.contains("implicit") && field<bool>(item, "implicit");
    if (item.contains("guard")) {
      const json& g = item.at("guard");
      a.guard = Guard{field<std::string>(g, "input"), field<bool>(g, "negated")};
    }
    model.actions.push_back(std::move(a));
  }
  for (const auto& item : array_field(doc, "flows", true))
    model.flows.push_back({field<std::string>(item, "id"), field<std::string>(item, "from"),
                           field<std::string>(item, "to")});
  for (const auto& item : array_field(doc, "triggers", true))
    model.triggers.push_back({field<std::string>(item, "id"), field<std::string>(item, "from"),
                              field<std::string>(item, "to")});
  for (const auto& item : array_field(doc, "storages", true))
    model.storages.push_back({field<std::string>(item, "id"), field<std::string>(item, "owner"),
                              field<std::string>(item, "label")});
  for (const auto& item : array_field(doc, "junctions", true)) {
    auto mode = field<std::string>(item, "mode");
    if (mode != "or" && mode != "and") malformed("junction mode '" + mode + "'");
    model.junctions.push_back({field<std::string>(item, "id"), field<std::string>(item, "owner"),
                               mode == "or" ? JunctionMode::Or : JunctionMode::And});
  }
  for (const auto& item : array_field(doc, "events", false)) {
    Event e;
    e.id = field<std::string>(item, "id");
    e.label = field<std::string>(item, "label");
    e.covers = field<std::vector<std::string>>(item, "covers");
    auto polarity = field<std::string>(item, "polarity");
    if (polarity != "present" && polarity != "absent") malformed("polarity '" + polarity + "'");
    e.polarity = polarity == "present" ? Polarity::Present : Polarity::Absent;
    if (item.contains("duration")) {
      const json& d = item.at("duration");
      e.duration = Duration{field<double>(d, "magnitude"), field<std::string>(d, "unit")};
    }
    if (item.contains("tense")) {
      auto tense = field<std::string>(item, "tense");
      if (tense != "past" && tense != "now") malformed("tense '" + tense + "'");
      e.tense = tense == "past" ? Tense::Past : Tense::Now;
    }
    model.events.push_back(std::move(e));
  }
  for (const auto& item : array_field(doc, "chronology", false)) {
    auto kind = field<std::string>(item, "kind");
    if (kind != "precede" && kind != "repeat") malformed("chronology kind '" + kind + "'");
    model.chronology.push_back({field<std::string>(item, "from"), field<std::string>(item, "to"),
                                kind == "precede" ? ChronoKind::Precede : ChronoKind::Repeat});
  }
  for (const auto& item : array_field(doc, "focus", false))
    model.focus.push_back(
        {field<std::string>(item, "name"), field<std::vector<std::string>>(item, "events")});

  // Uniqueness and closure.
  std::set<std::string> ids;
  auto unique = [&](const std::string& id) {
    if (!ids.insert(id).second) throw ModelError(ErrorCode::DuplicateId, "duplicate id '" + id + "'");
  };
  for (const auto& t : model.thimacs) unique(t.id);
  for (const auto& a : model.actions) unique(a.id);
  for (const auto& s : model.storages) unique(s.id);
  for (const auto& j : model.junctions) unique(j.id);
  std::set<std::string> edge_ids;
  for (const auto& f : model.flows) {
    if (!edge_ids.insert(f.id).second) throw ModelError(ErrorCode::DuplicateId, "duplicate id '" + f.id + "'");
  }
  for (const auto& t : model.triggers) {
    if (!edge_ids.insert(t.id).second) throw ModelError(ErrorCode::DuplicateId, "duplicate id '" + t.id + "'");
  }
  std::set<std::string> event_ids;
  for (const auto& e : model.events) {
    if (!event_ids.insert(e.id).second)
      throw ModelError(ErrorCode::DuplicateId, "duplicate event '" + e.id + "'");
  }
  model.reindex();

  auto known = [&](const std::string& id, bool thimac) {
    auto ref = model.find(id);
    if (!ref || (ref->kind == ElementRef::Kind::Thimac) != thimac)
      throw ModelError(ErrorCode::UnknownId, "unknown id '" + id + "'");
  };
  for (const auto& t : model.thimacs) {
    if (t.parent) known(*t.parent, true);
    for (const auto& c : t.children) {
      if (!model.find(c)) throw ModelError(ErrorCode::UnknownId, "unknown child '" + c + "'");
    }
  }
  for (const auto& a : model.actions) known(a.owner, true);
  for (const auto& s : model.storages) known(s.owner, true);
  for (const auto& j : model.junctions) known(j.owner, true);
  for (const auto& f : model.flows) {
    known(f.from, false);
    known(f.to, false);
  }
  for (const auto& t : model.triggers) {
    known(t.from, false);
    known(t.to, false);
  }
  for (const auto& e : model.events) {
    for (const auto& c : e.covers) {
      if (!model.find(c)) throw ModelError(ErrorCode::UnknownId, "unknown covered id '" + c + "'");
    }
  }
  for (const auto& c : model.chronology) {
    if (!event_ids.contains(c.from) || !event_ids.contains(c.to))
      throw ModelError(ErrorCode::UnknownId, "chronology names an unknown event");
  }
  for (const auto& g : model.focus) {
    for (const auto& e : g.events) {
      if (!event_ids.contains(e)) throw ModelError(ErrorCode::UnknownId, "unknown event '" + e + "'");
    }
  }
  return model;
}

}  // namespace tmkit
