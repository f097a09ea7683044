#pragma once

// PlantUML subset used for plans (activity diagrams) and reasoning traces
// (class diagrams): data model, parser and canonical renderer.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace umlcot::uml {

struct ActivityNode {
  std::string label;

  bool operator==(const ActivityNode&) const = default;
};

enum class ControlKind { If, Else, Endif, While, Endwhile, Fork, Join };

std::string_view to_string(ControlKind kind);

struct ControlConstruct {
  ControlKind kind = ControlKind::If;
  std::optional<std::string> condition;
  // Number of nodes of the same container that precede this construct.
  std::size_t position = 0;

  bool operator==(const ControlConstruct&) const = default;
};

struct Partition {
  std::string name;
  std::vector<ActivityNode> nodes;
  std::vector<ControlConstruct> controls;

  bool operator==(const Partition&) const = default;
};

struct ActivityDiagram {
  std::vector<Partition> partitions;
  bool has_start = false;
  bool has_stop = false;
  std::vector<ActivityNode> orphan_nodes;
  std::vector<ControlConstruct> orphan_controls;

  std::size_t node_count() const;
  const Partition* find_partition(std::string_view name) const;

  bool operator==(const ActivityDiagram&) const = default;
};

enum class RelationKind { Association, Inheritance, Aggregation, Composition, Plain };

std::string_view to_string(RelationKind kind);
// Canonical arrow: "-->", "--|>", "o--", "*--", "--".
std::string_view arrow(RelationKind kind);

struct ClassDecl {
  std::string name;
  std::vector<std::string> members;
  // Created from a relation endpoint rather than a `class` line.
  bool implicit = false;

  bool operator==(const ClassDecl&) const = default;
};

struct Relation {
  std::string source;
  std::string target;
  RelationKind kind = RelationKind::Association;
  std::optional<std::string> label;

  bool operator==(const Relation&) const = default;
};

struct ClassDiagram {
  std::vector<ClassDecl> classes;
  std::vector<Relation> relations;

  const ClassDecl* find_class(std::string_view name) const;

  bool operator==(const ClassDiagram&) const = default;
};

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

/// True iff `@startuml` occurs and an `@enduml` occurs after it.
bool check_markers(std::string_view source);

/// Collapses whitespace runs (including newlines) to one space and trims.
std::string normalize_label(std::string_view text);

/// Parses the activity-diagram subset. Partition bodies are delimited with a
/// nesting counter, so anonymous `{ ... }` blocks inside a partition keep
/// their nodes in that partition; a nested `partition` opens its own.
/// Unrecognized lines are skipped and reported through `warnings`.
///
/// Throws umlcot::Error with MissingMarkers, UnbalancedBraces or
/// UnterminatedNode.
ActivityDiagram parse_activity(std::string_view source,
                               std::vector<ParseWarning>* warnings = nullptr);

/// Parses classes (with member bodies) and the five relation arrows.
/// Relation endpoints that were never declared become implicit classes.
///
/// Throws umlcot::Error with MissingMarkers or UnbalancedBraces.
ClassDiagram parse_class(std::string_view source,
                         std::vector<ParseWarning>* warnings = nullptr);

/// Canonical form: LF line endings, two-space indent inside partitions, no
/// trailing newline. parse_activity(render_activity(d)) == d.
std::string render_activity(const ActivityDiagram& diagram);

/// Canonical form; implicit classes are left for the parser to re-derive.
std::string render_class(const ClassDiagram& diagram);

}  // namespace umlcot::uml
