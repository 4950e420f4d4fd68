#pragma once

#include <array>
#include <optional>
#include <string>

#include "posterkit/image.hpp"
#include "posterkit/layout.hpp"

namespace posterkit::render {

struct CategoryFill {
  std::string color;     // CSS color, e.g. "#e53935"
  double opacity = 0.35;
};

struct RenderStyle {
  // Indexed by Category value: Logo, Text, Underlay, Embellishment.
  std::array<CategoryFill, 4> fills;
  double stroke_width = 2.0;
  bool labels = false;

  static RenderStyle defaults();
};

// Deterministic SVG overlay: canvas-sized viewport, optional background
// image, one rect per element in layout order.
std::string render_svg(const Layout& layout, const RenderStyle& style,
                       const std::optional<std::string>& background_href = std::nullopt);

// Binary canvas-sized mask: 1 inside some Text element box, else 0.
BitMask build_text_mask(const Layout& layout);

}  // namespace posterkit::render
