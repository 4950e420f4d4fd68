#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posterkit/image.hpp"
#include "posterkit/layout.hpp"

namespace posterkit::metrics {

// Axis-aligned pixel rectangle, half-open: [x, x+w) x [y, y+h).
struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
};

long long rect_area(const Rect& r);
long long rect_intersection_area(const Rect& a, const Rect& b);
double rect_iou(const Rect& a, const Rect& b);

// Ratio of elements whose area exceeds 0.1% of the canvas, over the
// whole set. Throws std::invalid_argument when there are no elements.
double validity(std::span<const Layout> layouts);

// Mean over ordered pairs (i, j), i != j, of valid non-Underlay elements
// of area(b_i .. b_j) / area(b_i). Zero with fewer than two such elements.
double overlap(const Layout& layout);

// Per valid element, the minimum over the six alignment lines of the
// normalized distance to the closest other valid element on that line;
// averaged over elements. Zero for fewer than two valid elements.
double alignment(const Layout& layout);

struct UnderlayScore {
  double und_l = 0.0;  // mean best-coverage score over underlays
  double und_s = 0.0;  // fraction of underlays fully containing some element
};

// Scores valid Underlay elements by how well they back other valid
// elements. nullopt when the layout has no valid Underlay (such layouts
// are skipped when aggregating).
std::optional<UnderlayScore> underlay(const Layout& layout);

// Mean saliency over the pixel union of all valid element boxes; zero
// when the union is empty. Throws on canvas/image size mismatch.
double occlusion(const Layout& layout, const GrayImage& saliency);

// Mean gradient magnitude (central differences, replicated borders)
// over pixels inside valid Text boxes. nullopt when the layout has no
// valid Text element. Throws on size mismatch.
std::optional<double> readability(const Layout& layout, const GrayImage& canvas_image);

// Fraction of generated elements whose IoU with any inpainted region of
// the same sample exceeds the threshold.
double leakage_probe(std::span<const Layout> generated,
                     std::span<const std::vector<Rect>> inpainted_regions,
                     double iou_threshold);

struct Features {
  std::vector<double> values;
  bool truncated = false;  // layout had more than max_elems valid elements
};

// Deterministic geometric features: valid elements sorted by (y, x,
// category), each one-hot category + normalized box, zero-padded.
Features geometric_featurizer(const Layout& layout, int max_elems);

struct MetricReport {
  double val = 0.0;
  double ove = 0.0;
  double ali = 0.0;
  double und_l = 0.0;
  double und_s = 0.0;
  std::optional<double> fd;
  std::optional<double> rea;
  std::optional<double> occ;
  std::size_t n_samples = 0;
  std::size_t n_failures = 0;
  std::size_t n_underlay_layouts = 0;  // layouts contributing to und_*
  std::size_t n_text_layouts = 0;      // layouts contributing to rea
};

// Deterministic fixed-order fold over per-layout metrics. Saliency /
// canvas images are optional per layout (nullptr to skip content
// metrics for that layout). Throws when layouts is empty.
MetricReport aggregate(std::span<const Layout> layouts,
                       std::span<const GrayImage* const> saliency,
                       std::span<const GrayImage* const> canvas_images,
                       std::optional<double> fd, std::size_t n_failures);

std::string report_to_json(const MetricReport& report);
// Aligned table with the standard column order:
// val ove ali und_l und_s FD rea occ
std::string report_to_table(const MetricReport& report, std::string_view row_label);

}  // namespace posterkit::metrics
