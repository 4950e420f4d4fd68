#include "posterkit/render.hpp"

#include <algorithm>
#include <cstdio>
#include <string_view>

namespace posterkit::render {

namespace {

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

RenderStyle RenderStyle::defaults() {
  RenderStyle s;
  s.fills[std::size_t(Category::Logo)] = {"#e53935", 0.35};
  s.fills[std::size_t(Category::Text)] = {"#43a047", 0.35};
  s.fills[std::size_t(Category::Underlay)] = {"#1e88e5", 0.35};
  s.fills[std::size_t(Category::Embellishment)] = {"#fb8c00", 0.35};
  return s;
}

std::string render_svg(const Layout& layout, const RenderStyle& style,
                       const std::optional<std::string>& background_href) {
  validate_layout(layout);
  const int w = layout.canvas.width;
  const int h = layout.canvas.height;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
         " " + std::to_string(h) + "\">\n";
  if (background_href) {
    out += "  <image href=\"" + escape_xml(*background_href) + "\" x=\"0\" y=\"0\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(h) + "\"/>\n";
  }
  for (const Element& e : layout.elements) {
    const CategoryFill& fill = style.fills[std::size_t(e.category)];
    out += "  <rect data-category=\"" + std::string(category_name(e.category)) +
           "\" x=\"" + std::to_string(e.x) + "\" y=\"" + std::to_string(e.y) +
           "\" width=\"" + std::to_string(e.w) + "\" height=\"" + std::to_string(e.h) +
           "\" fill=\"" + fill.color + "\" fill-opacity=\"" + fmt(fill.opacity) +
           "\" stroke=\"" + fill.color + "\" stroke-width=\"" + fmt(style.stroke_width) +
           "\"/>\n";
    if (style.labels) {
      out += "  <text x=\"" + std::to_string(e.x + 2) + "\" y=\"" +
             std::to_string(e.y + 12) + "\" font-size=\"10\" fill=\"" + fill.color +
             "\">" + std::string(category_name(e.category)) + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

BitMask build_text_mask(const Layout& layout) {
  validate_layout(layout);
  BitMask mask;
  mask.width = layout.canvas.width;
  mask.height = layout.canvas.height;
  mask.bits.assign(std::size_t(mask.width) * mask.height, 0);
  for (const Element& e : layout.elements) {
    if (e.category != Category::Text) continue;
    const int x1 = std::min(e.x + e.w, mask.width);
    const int y1 = std::min(e.y + e.h, mask.height);
    for (int y = e.y; y < y1; ++y) {
      auto* row = mask.bits.data() + std::size_t(y) * mask.width;
      for (int x = e.x; x < x1; ++x) row[x] = 1;
    }
  }
  return mask;
}

}  // namespace posterkit::render
