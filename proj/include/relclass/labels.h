#ifndef RELCLASS_LABELS_H_
#define RELCLASS_LABELS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace relclass {

// The nine SemEval 2010 Task 8 relation families plus Other, in the order of
// the official scorer.
enum class Family {
  kCauseEffect = 0,
  kInstrumentAgency,
  kProductProducer,
  kContentContainer,
  kEntityOrigin,
  kEntityDestination,
  kComponentWhole,
  kMemberCollection,
  kMessageTopic,
  kOther,
};

enum class Direction { kE1E2, kE2E1, kNone };

inline constexpr std::size_t kNumFamilies = 9;
inline constexpr std::size_t kNumDirectedLabels = 18;
inline constexpr std::size_t kNumLabels = 19;

// Label ids: 2 * family + (direction == e2,e1) for the 18 directed labels,
// 18 for Other. Ranking scorers have one row per directed label, so a
// directed label's id is also its ranking score index.
inline constexpr std::size_t kOtherId = 18;

struct RelationLabel {
  Family family = Family::kOther;
  Direction direction = Direction::kNone;

  static RelationLabel other() { return {}; }
  static RelationLabel from_id(std::size_t id);
  // Parses the official spelling, e.g. "Cause-Effect(e2,e1)" or "Other".
  static std::optional<RelationLabel> parse(std::string_view text);

  std::size_t id() const;
  bool is_other() const { return family == Family::kOther; }
  std::string to_string() const;

  friend bool operator==(const RelationLabel&, const RelationLabel&) = default;
};

std::string_view family_name(Family family);

}  // namespace relclass

#endif  // RELCLASS_LABELS_H_
