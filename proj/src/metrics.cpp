#include "posterkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace posterkit::metrics {

namespace {

Rect to_rect(const Element& e) { return Rect{e.x, e.y, e.w, e.h}; }

// Fixed-order compensated sum.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

// Rasterizes the union of boxes into a reusable mask.
void union_mask(const std::vector<const Element*>& elems, BitMask& mask) {
  std::fill(mask.bits.begin(), mask.bits.end(), std::uint8_t(0));
  for (const Element* e : elems) {
    const int x1 = std::min(e->x + e->w, mask.width);
    const int y1 = std::min(e->y + e->h, mask.height);
    for (int y = e->y; y < y1; ++y) {
      auto* row = mask.bits.data() + std::size_t(y) * mask.width;
      for (int x = e->x; x < x1; ++x) row[x] = 1;
    }
  }
}

}  // namespace

long long rect_area(const Rect& r) { return 1LL * r.w * r.h; }

long long rect_intersection_area(const Rect& a, const Rect& b) {
  const long long w = std::min<long long>(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const long long h = std::min<long long>(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (w <= 0 || h <= 0) return 0;
  return w * h;
}

double rect_iou(const Rect& a, const Rect& b) {
  const long long inter = rect_intersection_area(a, b);
  const long long uni = rect_area(a) + rect_area(b) - inter;
  if (uni <= 0) return 0.0;
  return double(inter) / double(uni);
}

double validity(std::span<const Layout> layouts) {
  std::size_t total = 0, valid = 0;
  for (const Layout& l : layouts) {
    for (const Element& e : l.elements) {
      ++total;
      if (is_valid(e, l.canvas)) ++valid;
    }
  }
  if (total == 0) throw std::invalid_argument("validity undefined for zero elements");
  return double(valid) / double(total);
}

double overlap(const Layout& layout) {
  std::vector<const Element*> elems;
  for (const Element* e : valid_elements(layout))
    if (e->category != Category::Underlay) elems.push_back(e);
  if (elems.size() < 2) return 0.0;
  KahanSum sum;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Rect ri = to_rect(*elems[i]);
    const long long ai = rect_area(ri);
    for (std::size_t j = 0; j < elems.size(); ++j) {
      if (i == j) continue;
      sum.add(double(rect_intersection_area(ri, to_rect(*elems[j]))) / double(ai));
      ++pairs;
    }
  }
  return sum.sum / double(pairs);
}

double alignment(const Layout& layout) {
  const auto elems = valid_elements(layout);
  if (elems.size() < 2) return 0.0;
  const double w_extent = layout.canvas.width;
  const double h_extent = layout.canvas.height;
  // Six alignment lines per element: left, x-center, right (normalized
  // by width); top, y-center, bottom (normalized by height).
  std::vector<std::array<double, 6>> lines(elems.size());
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Element& e = *elems[i];
    lines[i] = {e.x / w_extent, (e.x + e.w / 2.0) / w_extent, (e.x + e.w) / w_extent,
                e.y / h_extent, (e.y + e.h / 2.0) / h_extent, (e.y + e.h) / h_extent};
  }
  KahanSum sum;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 6; ++a) {
      for (std::size_t j = 0; j < elems.size(); ++j) {
        if (i == j) continue;
        best = std::min(best, std::abs(lines[i][a] - lines[j][a]));
      }
    }
    sum.add(best);
  }
  return sum.sum / double(elems.size());
}

std::optional<UnderlayScore> underlay(const Layout& layout) {
  std::vector<const Element*> unders, others;
  for (const Element* e : valid_elements(layout)) {
    if (e->category == Category::Underlay)
      unders.push_back(e);
    else
      others.push_back(e);
  }
  if (unders.empty()) return std::nullopt;
  KahanSum loose;
  std::size_t strict = 0;
  for (const Element* u : unders) {
    const Rect ru = to_rect(*u);
    double best = 0.0;
    bool contains = false;
    for (const Element* e : others) {
      const Rect re = to_rect(*e);
      const long long inter = rect_intersection_area(ru, re);
      best = std::max(best, double(inter) / double(rect_area(re)));
      if (inter == rect_area(re)) contains = true;  // exact containment
    }
    loose.add(best);
    if (contains) ++strict;
  }
  UnderlayScore s;
  s.und_l = loose.sum / double(unders.size());
  s.und_s = double(strict) / double(unders.size());
  return s;
}

double occlusion(const Layout& layout, const GrayImage& saliency) {
  if (saliency.width != layout.canvas.width || saliency.height != layout.canvas.height)
    throw std::invalid_argument("saliency dimensions do not match canvas");
  const auto elems = valid_elements(layout);
  BitMask mask;
  mask.width = saliency.width;
  mask.height = saliency.height;
  mask.bits.assign(std::size_t(mask.width) * mask.height, 0);
  union_mask(elems, mask);
  KahanSum sum;
  std::size_t covered = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        sum.add(saliency.at(x, y));
        ++covered;
      }
    }
  }
  if (covered == 0) return 0.0;
  return sum.sum / double(covered);
}

std::optional<double> readability(const Layout& layout, const GrayImage& canvas_image) {
  if (canvas_image.width != layout.canvas.width ||
      canvas_image.height != layout.canvas.height)
    throw std::invalid_argument("canvas image dimensions do not match canvas");
  std::vector<const Element*> texts;
  for (const Element* e : valid_elements(layout))
    if (e->category == Category::Text) texts.push_back(e);
  if (texts.empty()) return std::nullopt;
  BitMask mask;
  mask.width = canvas_image.width;
  mask.height = canvas_image.height;
  mask.bits.assign(std::size_t(mask.width) * mask.height, 0);
  union_mask(texts, mask);
  const int w = canvas_image.width, h = canvas_image.height;
  auto px = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);  // replicate borders
    y = std::clamp(y, 0, h - 1);
    return canvas_image.at(x, y);
  };
  KahanSum sum;
  std::size_t covered = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const double gx = (px(x + 1, y) - px(x - 1, y)) / 2.0;
      const double gy = (px(x, y + 1) - px(x, y - 1)) / 2.0;
      sum.add(std::sqrt(gx * gx + gy * gy));
      ++covered;
    }
  }
  if (covered == 0) return 0.0;
  return sum.sum / double(covered);
}

double leakage_probe(std::span<const Layout> generated,
                     std::span<const std::vector<Rect>> inpainted_regions,
                     double iou_threshold) {
  if (generated.size() != inpainted_regions.size())
    throw std::invalid_argument("region lists must align with layouts");
  std::size_t total = 0, hits = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    for (const Element& e : generated[i].elements) {
      ++total;
      const Rect re = to_rect(e);
      for (const Rect& r : inpainted_regions[i]) {
        if (rect_iou(re, r) > iou_threshold) {
          ++hits;
          break;
        }
      }
    }
  }
  if (total == 0) return 0.0;
  return double(hits) / double(total);
}

Features geometric_featurizer(const Layout& layout, int max_elems) {
  if (max_elems <= 0) throw std::invalid_argument("max_elems must be positive");
  auto elems = valid_elements(layout);
  std::sort(elems.begin(), elems.end(), [](const Element* a, const Element* b) {
    if (a->y != b->y) return a->y < b->y;
    if (a->x != b->x) return a->x < b->x;
    return int(a->category) < int(b->category);
  });
  Features out;
  out.truncated = elems.size() > std::size_t(max_elems);
  if (out.truncated) elems.resize(std::size_t(max_elems));
  out.values.assign(std::size_t(max_elems) * 8, 0.0);
  const double w_extent = layout.canvas.width;
  const double h_extent = layout.canvas.height;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const Element& e = *elems[i];
    double* slot = out.values.data() + i * 8;
    slot[std::size_t(e.category)] = 1.0;
    slot[4] = e.x / w_extent;
    slot[5] = e.y / h_extent;
    slot[6] = e.w / w_extent;
    slot[7] = e.h / h_extent;
  }
  return out;
}

MetricReport aggregate(std::span<const Layout> layouts,
                       std::span<const GrayImage* const> saliency,
                       std::span<const GrayImage* const> canvas_images,
                       std::optional<double> fd, std::size_t n_failures) {
  if (layouts.empty()) throw std::invalid_argument("no layouts to aggregate");
  MetricReport r;
  r.n_samples = layouts.size() + n_failures;
  r.n_failures = n_failures;
  r.fd = fd;
  r.val = validity(layouts);

  KahanSum ove_sum, ali_sum, undl_sum, unds_sum, occ_sum, rea_sum;
  std::size_t occ_n = 0;
  for (std::size_t i = 0; i < layouts.size(); ++i) {
    ove_sum.add(overlap(layouts[i]));
    ali_sum.add(alignment(layouts[i]));
    if (auto u = underlay(layouts[i])) {
      undl_sum.add(u->und_l);
      unds_sum.add(u->und_s);
      ++r.n_underlay_layouts;
    }
    if (i < saliency.size() && saliency[i]) {
      occ_sum.add(occlusion(layouts[i], *saliency[i]));
      ++occ_n;
    }
    if (i < canvas_images.size() && canvas_images[i]) {
      if (auto rea = readability(layouts[i], *canvas_images[i])) {
        rea_sum.add(*rea);
        ++r.n_text_layouts;
      }
    }
  }
  r.ove = ove_sum.sum / double(layouts.size());
  r.ali = ali_sum.sum / double(layouts.size());
  if (r.n_underlay_layouts) {
    r.und_l = undl_sum.sum / double(r.n_underlay_layouts);
    r.und_s = unds_sum.sum / double(r.n_underlay_layouts);
  }
  if (occ_n) r.occ = occ_sum.sum / double(occ_n);
  if (r.n_text_layouts) r.rea = rea_sum.sum / double(r.n_text_layouts);
  return r;
}

std::string report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["n_samples"] = report.n_samples;
  j["n_failures"] = report.n_failures;
  j["val"] = report.val;
  j["ove"] = report.ove;
  j["ali"] = report.ali;
  j["und_l"] = report.und_l;
  j["und_s"] = report.und_s;
  j["n_underlay_layouts"] = report.n_underlay_layouts;
  j["n_text_layouts"] = report.n_text_layouts;
  if (report.fd)
    j["fd"] = *report.fd;
  else
    j["fd"] = nullptr;
  if (report.rea)
    j["rea"] = *report.rea;
  else
    j["rea"] = nullptr;
  if (report.occ)
    j["occ"] = *report.occ;
  else
    j["occ"] = nullptr;
  return j.dump(2) + "\n";
}

std::string report_to_table(const MetricReport& report, std::string_view row_label) {
  auto cell = [](std::optional<double> v) {
    char buf[32];
    if (v)
      std::snprintf(buf, sizeof buf, "%8.4f", *v);
    else
      std::snprintf(buf, sizeof buf, "%8s", "-");
    return std::string(buf);
  };
  std::string out;
  char head[160];
  std::snprintf(head, sizeof head, "%-16s %8s %8s %8s %8s %8s %8s %8s %8s\n", "",
                "val", "ove", "ali", "und_l", "und_s", "FD", "rea", "occ");
  out += head;
  char row[16 + 1];
  std::snprintf(row, sizeof row, "%-16s", std::string(row_label).c_str());
  out += row;
  out += " " + cell(report.val) + " " + cell(report.ove) + " " + cell(report.ali) +
         " " + cell(report.und_l) + " " + cell(report.und_s) + " " + cell(report.fd) +
         " " + cell(report.rea) + " " + cell(report.occ) + "\n";
  return out;
}

}  // namespace posterkit::metrics
