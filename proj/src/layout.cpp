#include "posterkit/layout.hpp"

#include <cmath>
#include <stdexcept>

#include "posterkit/rng.hpp"

namespace posterkit {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Logo: return "Logo";
    case Category::Text: return "Text";
    case Category::Underlay: return "Underlay";
    case Category::Embellishment: return "Embellishment";
  }
  return "Text";
}

std::optional<Category> category_from_name(std::string_view name) {
  if (name == "Logo") return Category::Logo;
  if (name == "Text") return Category::Text;
  if (name == "Underlay") return Category::Underlay;
  if (name == "Embellishment") return Category::Embellishment;
  return std::nullopt;
}

bool profile_allows(Profile p, Category c) {
  if (c == Category::Embellishment) return p == Profile::CGL;
  return true;
}

std::string_view profile_name(Profile p) {
  return p == Profile::PKU ? "PKU" : "CGL";
}

std::optional<Profile> profile_from_name(std::string_view name) {
  if (name == "PKU" || name == "pku") return Profile::PKU;
  if (name == "CGL" || name == "cgl") return Profile::CGL;
  return std::nullopt;
}

MaskedElement to_masked(const Element& e) {
  return MaskedElement{e.category, e.x, e.y, e.w, e.h};
}

bool bounds_ok(const Element& e, const Canvas& c) {
  if (e.x < 0 || e.y < 0 || e.w < 0 || e.h < 0) return false;
  return e.x + e.w <= c.width && e.y + e.h <= c.height;
}

void validate_layout(const Layout& l) {
  if (l.canvas.width <= 0 || l.canvas.height <= 0)
    throw std::invalid_argument("canvas dimensions must be positive");
  for (const Element& e : l.elements) {
    if (!bounds_ok(e, l.canvas))
      throw std::invalid_argument("element overflows canvas");
  }
  if (l.texts) {
    std::size_t n_text = 0;
    for (const Element& e : l.elements)
      if (e.category == Category::Text) ++n_text;
    if (l.texts->size() != n_text)
      throw std::invalid_argument("texts list does not align with Text elements");
  }
}

int discretize(double x_cont, int axis_extent) {
  if (axis_extent <= 0) throw std::invalid_argument("axis extent must be positive");
  if (!(x_cont >= 0.0 && x_cont <= 1.0))
    throw std::invalid_argument("continuous coordinate outside [0,1]");
  long v = std::lround(x_cont * axis_extent);
  if (v < 0) v = 0;
  if (v > axis_extent) v = axis_extent;
  return int(v);
}

bool is_valid(const Element& e, const Canvas& c) {
  // Strict: area ratio must exceed 1/1000. Kept in integers.
  const long long area = 1000LL * e.w * e.h;
  return area > 1LL * c.width * c.height;
}

std::vector<const Element*> valid_elements(const Layout& l) {
  std::vector<const Element*> out;
  out.reserve(l.elements.size());
  for (const Element& e : l.elements)
    if (is_valid(e, l.canvas)) out.push_back(&e);
  return out;
}

std::pair<std::vector<MaskedElement>, std::vector<Element>> permute_synchronized(
    const std::vector<MaskedElement>& input_elems,
    const std::vector<Element>& target_elems, std::uint64_t seed) {
  if (input_elems.size() != target_elems.size())
    throw std::invalid_argument("permute_synchronized: length mismatch");
  auto eng = rng::make_engine(seed);
  const auto idx = rng::permutation(eng, input_elems.size());
  std::vector<MaskedElement> in;
  std::vector<Element> tgt;
  in.reserve(idx.size());
  tgt.reserve(idx.size());
  for (std::size_t i : idx) {
    in.push_back(input_elems[i]);
    tgt.push_back(target_elems[i]);
  }
  return {std::move(in), std::move(tgt)};
}

}  // namespace posterkit
