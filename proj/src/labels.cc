#include "relclass/labels.h"

#include <stdexcept>

namespace relclass {
namespace {

constexpr std::array<std::string_view, kNumFamilies> kFamilyNames = {
    "Cause-Effect",      "Instrument-Agency",  "Product-Producer",
    "Content-Container", "Entity-Origin",      "Entity-Destination",
    "Component-Whole",   "Member-Collection",  "Message-Topic",
};

}  // namespace

std::string_view family_name(Family family) {
  if (family == Family::kOther) return "Other";
  return kFamilyNames[static_cast<std::size_t>(family)];
}

RelationLabel RelationLabel::from_id(std::size_t id) {
  if (id == kOtherId) return other();
  if (id > kOtherId) throw std::out_of_range("label id " + std::to_string(id));
  return {static_cast<Family>(id / 2), id % 2 == 0 ? Direction::kE1E2 : Direction::kE2E1};
}

std::optional<RelationLabel> RelationLabel::parse(std::string_view text) {
  if (text == "Other") return other();
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    const std::string_view name = kFamilyNames[f];
    if (text.substr(0, name.size()) != name) continue;
    const std::string_view rest = text.substr(name.size());
    if (rest == "(e1,e2)") return RelationLabel{static_cast<Family>(f), Direction::kE1E2};
    if (rest == "(e2,e1)") return RelationLabel{static_cast<Family>(f), Direction::kE2E1};
  }
  return std::nullopt;
}

std::size_t RelationLabel::id() const {
  if (family == Family::kOther) return kOtherId;
  return 2 * static_cast<std::size_t>(family) + (direction == Direction::kE2E1 ? 1 : 0);
}

std::string RelationLabel::to_string() const {
  if (family == Family::kOther) return "Other";
  std::string s(family_name(family));
  s += direction == Direction::kE1E2 ? "(e1,e2)" : "(e2,e1)";
  return s;
}

}  // namespace relclass
