#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snaptriage/error.hpp"

namespace snaptriage {

enum class CategoryKind {
  ColorChange,
  PaddingChange,
  ContentChange,
  LayoutChange,
  TextChange,
  AnimationPhase,
  AnimationChange,
  SemanticChange,
  Unknown,
};

/// The eight closed-taxonomy kinds, in canonical table order.
inline constexpr std::array<CategoryKind, 8> kKnownKinds = {
    CategoryKind::ColorChange,    CategoryKind::PaddingChange, CategoryKind::ContentChange,
    CategoryKind::LayoutChange,   CategoryKind::TextChange,    CategoryKind::AnimationPhase,
    CategoryKind::AnimationChange, CategoryKind::SemanticChange,
};

/// A failure category. Unknown categories carry an uppercase tag
/// (`[A-Z0-9_]+`); known categories never do.
class Category {
 public:
  /// Throws InvalidCategory when `kind` is Unknown; use unknown() for those.
  explicit Category(CategoryKind kind);

  /// Throws InvalidCategory unless `tag` matches `[A-Z0-9_]+`.
  static Category unknown(std::string tag);

  CategoryKind kind() const noexcept { return kind_; }
  bool is_unknown() const noexcept { return kind_ == CategoryKind::Unknown; }
  const std::string& unknown_tag() const noexcept { return tag_; }

  /// Wire representation, e.g. `COLOR_CHANGE` or `UNKNOWN_SHADOW_CHANGE`.
  std::string canonical_name() const;

  friend bool operator==(const Category&, const Category&) = default;

 private:
  Category(CategoryKind kind, std::string tag) : kind_(kind), tag_(std::move(tag)) {}

  CategoryKind kind_;
  std::string tag_;
};

std::string_view known_name(CategoryKind kind);
std::string_view description(CategoryKind kind);

/// Ordered, duplicate-free set of categories. Insertion order is preserved.
class CategorySet {
 public:
  CategorySet() = default;

  /// Returns false (and leaves the set unchanged) if an equal category is
  /// already present.
  bool insert(Category category);
  bool contains(const Category& category) const;
  /// Returns true if the category was present.
  bool erase(const Category& category);
  bool has_unknown() const;

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const Category& front() const { return members_.front(); }
  const std::vector<Category>& members() const noexcept { return members_; }
  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

  std::vector<std::string> canonical_names() const;

  friend bool operator==(const CategorySet&, const CategorySet&) = default;

 private:
  std::vector<Category> members_;
};

/// Thrown by parse_category_set; carries the index of the failing element.
class InvalidCategoryError : public Error {
 public:
  InvalidCategoryError(std::size_t index, const std::string& message)
      : Error(ErrorKind::InvalidCategory, "element " + std::to_string(index) + ": " + message),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

Category parse_category(std::string_view raw);
CategorySet parse_category_set(std::span<const std::string> raws);

}  // namespace snaptriage
