#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace posterkit {

enum class Category { Logo = 0, Text = 1, Underlay = 2, Embellishment = 3 };

// Dataset profiles restrict the allowed category set.
enum class Profile { PKU, CGL };

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);
bool profile_allows(Profile p, Category c);
std::string_view profile_name(Profile p);
std::optional<Profile> profile_from_name(std::string_view name);

struct Canvas {
  int width = 0;   // pixels, > 0
  int height = 0;  // pixels, > 0
  std::string image_ref;
  std::optional<std::string> saliency_ref;

  bool operator==(const Canvas&) const = default;
};

struct Element {
  Category category = Category::Text;
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Element&) const = default;
};

// An element with per-attribute mask slots; nullopt means masked (<M>).
struct MaskedElement {
  std::optional<Category> category;
  std::optional<int> x;
  std::optional<int> y;
  std::optional<int> w;
  std::optional<int> h;

  bool operator==(const MaskedElement&) const = default;
};

MaskedElement to_masked(const Element& e);

struct Layout {
  Canvas canvas;
  std::vector<Element> elements;  // order is the serialization order
  // One string per Text-category element, aligned by order of appearance.
  std::optional<std::vector<std::string>> texts;
};

// True iff the element fits inside the canvas (overflow is a parse
// failure, never clamped).
bool bounds_ok(const Element& e, const Canvas& c);

// Throws std::invalid_argument if elements overflow the canvas or the
// texts list does not align with the Text elements.
void validate_layout(const Layout& l);

// round(x_cont * axis_extent), clamped to [0, axis_extent].
// Throws std::invalid_argument outside [0,1] or for extent <= 0.
int discretize(double x_cont, int axis_extent);

// Element area must exceed 0.1% of the canvas area (strict >).
bool is_valid(const Element& e, const Canvas& c);

std::vector<const Element*> valid_elements(const Layout& l);

// Applies one seeded uniform permutation to both lists, preserving the
// input[i] <-> target[i] pairing. Throws on length mismatch.
std::pair<std::vector<MaskedElement>, std::vector<Element>> permute_synchronized(
    const std::vector<MaskedElement>& input_elems,
    const std::vector<Element>& target_elems, std::uint64_t seed);

}  // namespace posterkit
