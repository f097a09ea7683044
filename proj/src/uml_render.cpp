#include <regex>
#include <string>
#include <vector>

#include "umlcot/uml.hpp"

namespace umlcot::uml {

std::string_view to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::If: return "if";
    case ControlKind::Else: return "else";
    case ControlKind::Endif: return "endif";
    case ControlKind::While: return "while";
    case ControlKind::Endwhile: return "endwhile";
    case ControlKind::Fork: return "fork";
    case ControlKind::Join: return "join";
  }
  return "if";
}

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::Association: return "association";
    case RelationKind::Inheritance: return "inheritance";
    case RelationKind::Aggregation: return "aggregation";
    case RelationKind::Composition: return "composition";
    case RelationKind::Plain: return "plain";
  }
  return "plain";
}

std::string_view arrow(RelationKind kind) {
  switch (kind) {
    case RelationKind::Association: return "-->";
    case RelationKind::Inheritance: return "--|>";
    case RelationKind::Aggregation: return "o--";
    case RelationKind::Composition: return "*--";
    case RelationKind::Plain: return "--";
  }
  return "--";
}

std::size_t ActivityDiagram::node_count() const {
  auto n = orphan_nodes.size();
  for (const auto& p : partitions) n += p.nodes.size();
  return n;
}

const Partition* ActivityDiagram::find_partition(std::string_view name) const {
  for (const auto& p : partitions) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ClassDecl* ClassDiagram::find_class(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

void emit_control(std::vector<std::string>& out, const std::string& indent,
                  const ControlConstruct& c) {
  std::string line = indent + std::string(to_string(c.kind));
  if (c.condition) line += " " + *c.condition;
  out.push_back(std::move(line));
}

// Interleaves controls with nodes according to their recorded positions.
void emit_container(std::vector<std::string>& out, const std::string& indent,
                    const std::vector<ActivityNode>& nodes,
                    const std::vector<ControlConstruct>& controls) {
  std::size_t next_control = 0;
  for (std::size_t i = 0; i <= nodes.size(); ++i) {
    while (next_control < controls.size() && controls[next_control].position <= i) {
      emit_control(out, indent, controls[next_control++]);
    }
    if (i < nodes.size()) out.push_back(indent + ":" + nodes[i].label + ";");
  }
  while (next_control < controls.size()) emit_control(out, indent, controls[next_control++]);
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::string class_name(const std::string& name) {
  static const std::regex identifier(R"([A-Za-z_][\w.]*)");
  if (std::regex_match(name, identifier)) return name;
  return "\"" + name + "\"";
}

}  // namespace

std::string render_activity(const ActivityDiagram& diagram) {
  std::vector<std::string> out{"@startuml"};
  if (diagram.has_start) out.emplace_back("start");
  emit_container(out, "", diagram.orphan_nodes, diagram.orphan_controls);
  for (const auto& p : diagram.partitions) {
    if (p.name.find('"') == std::string::npos) {
      out.push_back("partition \"" + p.name + "\" {");
    } else {
      out.push_back("partition " + p.name + " {");
    }
    emit_container(out, "  ", p.nodes, p.controls);
    out.emplace_back("}");
  }
  if (diagram.has_stop) out.emplace_back("stop");
  out.emplace_back("@enduml");
  return join_lines(out);
}

std::string render_class(const ClassDiagram& diagram) {
  std::vector<std::string> out{"@startuml"};
  for (const auto& c : diagram.classes) {
    if (c.implicit) continue;
    if (c.members.empty()) {
      out.push_back("class " + class_name(c.name));
      continue;
    }
    out.push_back("class " + class_name(c.name) + " {");
    for (const auto& m : c.members) out.push_back("  " + m);
    out.emplace_back("}");
  }
  for (const auto& r : diagram.relations) {
    std::string line =
        class_name(r.source) + " " + std::string(arrow(r.kind)) + " " + class_name(r.target);
    if (r.label) line += " : " + *r.label;
    out.push_back(std::move(line));
  }
  out.emplace_back("@enduml");
  return join_lines(out);
}

}  // namespace umlcot::uml
