#include "snaptriage/taxonomy.hpp"

#include <algorithm>
#include <cctype>

namespace snaptriage {

namespace {

constexpr std::string_view kUnknownPrefix = "UNKNOWN_";
constexpr std::string_view kUnspecifiedTag = "UNSPECIFIED";

bool is_valid_tag(std::string_view tag) {
  return !tag.empty() && std::all_of(tag.begin(), tag.end(), [](unsigned char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Category::Category(CategoryKind kind) : kind_(kind) {
  if (kind == CategoryKind::Unknown) {
    throw Error(ErrorKind::InvalidCategory, "unknown categories require a tag");
  }
}

Category Category::unknown(std::string tag) {
  if (!is_valid_tag(tag)) {
    throw Error(ErrorKind::InvalidCategory, "invalid unknown tag '" + tag + "'");
  }
  return Category(CategoryKind::Unknown, std::move(tag));
}

std::string Category::canonical_name() const {
  if (is_unknown()) return std::string(kUnknownPrefix) + tag_;
  return std::string(known_name(kind_));
}

std::string_view known_name(CategoryKind kind) {
  switch (kind) {
    case CategoryKind::ColorChange: return "COLOR_CHANGE";
    case CategoryKind::PaddingChange: return "PADDING_CHANGE";
    case CategoryKind::ContentChange: return "CONTENT_CHANGE";
    case CategoryKind::LayoutChange: return "LAYOUT_CHANGE";
    case CategoryKind::TextChange: return "TEXT_CHANGE";
    case CategoryKind::AnimationPhase: return "ANIMATION_PHASE";
    case CategoryKind::AnimationChange: return "ANIMATION_CHANGE";
    case CategoryKind::SemanticChange: return "SEMANTIC_CHANGE";
    case CategoryKind::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::string_view description(CategoryKind kind) {
  switch (kind) {
    case CategoryKind::ColorChange: return "Different color values due to styling updates.";
    case CategoryKind::PaddingChange: return "Change in margins/spacing; layout shifts.";
    case CategoryKind::ContentChange: return "Different content (e.g. image) with changed meaning.";
    case CategoryKind::LayoutChange: return "Components repositioned/resized, changing structure.";
    case CategoryKind::TextChange: return "Text string changed, altering displayed message meaning.";
    case CategoryKind::AnimationPhase: return "Snapshot taken mid-animation, showing intermediate state.";
    case CategoryKind::AnimationChange: return "Change in animation duration/timing alters output.";
    case CategoryKind::SemanticChange: return "Behavior changed (toggle on/off) without layout/text change.";
    case CategoryKind::Unknown: return "Change not from above categories; T names new reason.";
  }
  return "";
}

Category parse_category(std::string_view raw) {
  std::string_view trimmed = trim(raw);
  if (trimmed.empty()) {
    throw Error(ErrorKind::InvalidCategory, "empty category string");
  }
  std::string upper(trimmed);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });

  for (CategoryKind kind : kKnownKinds) {
    if (upper == known_name(kind)) return Category(kind);
  }
  if (upper == "UNKNOWN") return Category::unknown(std::string(kUnspecifiedTag));
  if (upper.starts_with(kUnknownPrefix)) {
    std::string tag = upper.substr(kUnknownPrefix.size());
    if (!is_valid_tag(tag)) {
      throw Error(ErrorKind::InvalidCategory, "invalid unknown tag in '" + std::string(trimmed) + "'");
    }
    return Category::unknown(std::move(tag));
  }
  throw Error(ErrorKind::InvalidCategory, "'" + std::string(trimmed) + "' is not a known category");
}

CategorySet parse_category_set(std::span<const std::string> raws) {
  CategorySet set;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    try {
      set.insert(parse_category(raws[i]));
    } catch (const Error& e) {
      throw InvalidCategoryError(i, e.detail());
    }
  }
  return set;
}

bool CategorySet::insert(Category category) {
  if (contains(category)) return false;
  members_.push_back(std::move(category));
  return true;
}

bool CategorySet::contains(const Category& category) const {
  return std::find(members_.begin(), members_.end(), category) != members_.end();
}

bool CategorySet::erase(const Category& category) {
  auto it = std::find(members_.begin(), members_.end(), category);
  if (it == members_.end()) return false;
  members_.erase(it);
  return true;
}

bool CategorySet::has_unknown() const {
  return std::any_of(members_.begin(), members_.end(),
                     [](const Category& c) { return c.is_unknown(); });
}

std::vector<std::string> CategorySet::canonical_names() const {
  std::vector<std::string> names;
  names.reserve(members_.size());
  for (const auto& c : members_) names.push_back(c.canonical_name());
  return names;
}

}  // namespace snaptriage
