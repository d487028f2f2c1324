#pragma once

#include "hoiplan/geometry.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hoiplan {

enum class Compass { North, South, East, West, Northeast, Northwest, Southeast, Southwest };

std::string_view to_string(Compass c);
/// Case-insensitive; accepts "north-east" / "north_east" spellings of diagonals.
std::optional<Compass> parse_compass(std::string_view token);

/// Unit vector for `c` in a world frame where `north` points north and east
/// is north rotated clockwise by 90 degrees (seen from above, z up).
Vec2 compass_vector(Compass c, const Vec2& north);

/// on(object, base): object rests on the top surface of base.
struct OnRelation {
  std::string object;
  std::string base;
  friend bool operator==(const OnRelation&, const OnRelation&) = default;
};

/// adjacent(object, anchor, direction, distance)
struct AdjacentRelation {
  std::string object;
  std::string anchor;
  Compass direction = Compass::North;
  double distance = 1.0;
  friend bool operator==(const AdjacentRelation&, const AdjacentRelation&) = default;
};

/// facing(object, target)
struct FacingRelation {
  std::string object;
  std::string target;
  friend bool operator==(const FacingRelation&, const FacingRelation&) = default;
};

using SpatialRelation = std::variant<OnRelation, AdjacentRelation, FacingRelation>;

/// The object whose pose the relation constrains (first argument).
const std::string& subject(const SpatialRelation& r);
/// The reference object (second argument).
const std::string& reference(const SpatialRelation& r);

/// Parses relation calls, one per statement; statements are separated by
/// newlines or ';'. Function names are case-insensitive. Arguments are bare
/// tokens or double-quoted strings. Lines starting with '#' are comments.
///
/// Errors: ParseError, ArityError, BadDistance, BadDirection,
/// UnknownRelation, SelfRelation. The detail payload always carries
/// "line" and "column" (1-based).
std::vector<SpatialRelation> parse_relations(std::string_view text);

/// Inverse of parse_relations: one call per line.
std::string render_relations(std::span<const SpatialRelation> relations);
std::string render_relation(const SpatialRelation& relation);

struct ActionStep {
  std::string object_id;
  std::string text;
  friend bool operator==(const ActionStep&, const ActionStep&) = default;
};

/// "lift the X, move the X, put down the X"
std::string action_text(std::string_view object_name);

/// One step per non-blank line. Matching is case-insensitive; a trailing
/// period is ignored. object_id is the lowercased, trimmed name.
/// Errors: TemplateMismatch{line}, InconsistentObject{line}.
std::vector<ActionStep> parse_plan(std::string_view text);

std::string render_plan(std::span<const ActionStep> steps);

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

}  // namespace hoiplan
