#include "posterkit/html_codec.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace posterkit::codec {

namespace {

void append_attr(std::string& out, std::string_view name, std::optional<int> value,
                 bool last = false) {
  out += name;
  out += "=\"";
  if (value)
    out += std::to_string(*value);
  else
    out += kMaskToken;
  out += last ? "\"" : "\", ";
}

void append_rect(std::string& out, const MaskedElement& e) {
  out += "<rect data-category=\"";
  if (e.category)
    out += category_name(*e.category);
  else
    out += kMaskToken;
  out += "\", ";
  append_attr(out, "x", e.x);
  append_attr(out, "y", e.y);
  append_attr(out, "width", e.w);
  append_attr(out, "height", e.h, /*last=*/true);
  out += "/>\n";
}

std::string envelope(const Canvas& canvas, const std::vector<MaskedElement>& elems) {
  // Whitespace (including trailing spaces) is part of the wire contract.
  std::string out;
  out += "<html> \n";
  out += "<body>  \n";
  out += "<svg width = \"" + std::to_string(canvas.width) + "\", height = \"" +
         std::to_string(canvas.height) + "\">\n";
  for (const MaskedElement& e : elems) append_rect(out, e);
  out += "</svg> \n";
  out += "</body>\n";
  out += "</html>";
  return out;
}

bool digits_only(std::string_view s) {
  if (s.empty() || s.size() > 9) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

ParseOutcome fail(FailureKind kind, std::string detail) {
  ParseOutcome out;
  out.failure_kind = kind;
  out.detail = std::move(detail);
  return out;
}

// One scanned attribute assignment: name="value".
struct RawAttr {
  std::string_view name;
  std::string_view value;
};

// Scans name="value" pairs inside one rect tag. Tolerates arbitrary
// separators between pairs (commas, spaces) and unknown attributes.
bool scan_attrs(std::string_view tag, std::vector<RawAttr>& out) {
  std::size_t i = 0;
  while (i < tag.size()) {
    while (i < tag.size() && !(std::isalpha((unsigned char)tag[i]) || tag[i] == '-'))
      ++i;
    const std::size_t name_begin = i;
    while (i < tag.size() &&
           (std::isalnum((unsigned char)tag[i]) || tag[i] == '-' || tag[i] == '_'))
      ++i;
    if (i == name_begin) break;
    const std::string_view name = tag.substr(name_begin, i - name_begin);
    while (i < tag.size() && (tag[i] == ' ' || tag[i] == '\t')) ++i;
    if (i >= tag.size() || tag[i] != '=') continue;  // bare word, skip
    ++i;
    while (i < tag.size() && (tag[i] == ' ' || tag[i] == '\t')) ++i;
    if (i >= tag.size() || tag[i] != '"') return false;  // unquoted value
    ++i;
    const std::size_t val_begin = i;
    const std::size_t val_end = tag.find('"', i);
    if (val_end == std::string_view::npos) return false;  // unterminated
    out.push_back({name, tag.substr(val_begin, val_end - val_begin)});
    i = val_end + 1;
  }
  return true;
}

}  // namespace

std::string serialize(const Layout& layout,
                      const std::optional<std::vector<AttrMask>>& masks) {
  validate_layout(layout);
  if (masks && masks->size() != layout.elements.size())
    throw std::invalid_argument("serialize: masks do not align with elements");
  std::vector<MaskedElement> elems;
  elems.reserve(layout.elements.size());
  for (std::size_t i = 0; i < layout.elements.size(); ++i) {
    MaskedElement m = to_masked(layout.elements[i]);
    if (masks) {
      const AttrMask& am = (*masks)[i];
      if (am.category) m.category.reset();
      if (am.x) m.x.reset();
      if (am.y) m.y.reset();
      if (am.w) m.w.reset();
      if (am.h) m.h.reset();
    }
    elems.push_back(m);
  }
  return envelope(layout.canvas, elems);
}

std::string serialize_masked(const Canvas& canvas,
                             const std::vector<MaskedElement>& elements) {
  return envelope(canvas, elements);
}

ParseOutcome parse(std::string_view text, const Canvas& canvas, Profile profile) {
  if (canvas.width <= 0 || canvas.height <= 0)
    return fail(FailureKind::AbnormalFormat, "invalid canvas");

  // Restrict scanning to the outermost <html>...</html> span when present,
  // so prose around the envelope cannot inject rects.
  std::string_view view = text;
  const std::size_t html_begin = view.find("<html");
  if (html_begin != std::string_view::npos) {
    const std::size_t html_end = view.rfind("</html>");
    if (html_end != std::string_view::npos && html_end > html_begin)
      view = view.substr(html_begin, html_end + 7 - html_begin);
    else
      view = view.substr(html_begin);
  }

  const std::size_t svg_open = view.find("<svg");
  if (svg_open == std::string_view::npos)
    return fail(FailureKind::AbnormalFormat, "no svg envelope");
  const std::size_t svg_tag_end = view.find('>', svg_open);
  if (svg_tag_end == std::string_view::npos)
    return fail(FailureKind::AbnormalFormat, "unterminated svg tag");
  std::size_t svg_close = view.rfind("</svg>");
  if (svg_close == std::string_view::npos || svg_close < svg_tag_end)
    svg_close = view.size();  // lenient: scan to the end of the span
  const std::string_view body = view.substr(svg_tag_end + 1, svg_close - svg_tag_end - 1);

  std::vector<Element> elements;
  bool overflow = false;
  std::string overflow_detail;

  std::size_t pos = 0;
  while ((pos = body.find("<rect", pos)) != std::string_view::npos) {
    const std::size_t tag_end = body.find('>', pos);
    if (tag_end == std::string_view::npos)
      return fail(FailureKind::AbnormalFormat, "unterminated rect tag");
    const std::string_view tag = body.substr(pos + 5, tag_end - pos - 5);
    pos = tag_end + 1;

    std::vector<RawAttr> attrs;
    if (!scan_attrs(tag, attrs))
      return fail(FailureKind::AbnormalFormat, "malformed rect attributes");

    std::optional<std::string_view> cat, xs, ys, ws, hs;
    for (const RawAttr& a : attrs) {
      std::optional<std::string_view>* slot = nullptr;
      if (a.name == "data-category") slot = &cat;
      else if (a.name == "x") slot = &xs;
      else if (a.name == "y") slot = &ys;
      else if (a.name == "width") slot = &ws;
      else if (a.name == "height") slot = &hs;
      if (!slot) continue;  // unknown attributes are ignored
      if (*slot) return fail(FailureKind::AbnormalFormat, "duplicate rect attribute");
      *slot = a.value;
    }
    if (!cat || !xs || !ys || !ws || !hs)
      return fail(FailureKind::AbnormalFormat, "rect missing required attribute");

    const auto category = category_from_name(*cat);
    if (!category || !profile_allows(profile, *category))
      return fail(FailureKind::AbnormalFormat,
                  "unknown category: " + std::string(*cat));

    long long v[4];
    const std::string_view raw[4] = {*xs, *ys, *ws, *hs};
    for (int i = 0; i < 4; ++i) {
      if (!digits_only(raw[i]))
        return fail(FailureKind::AbnormalFormat,
                    "non-integer coordinate: " + std::string(raw[i]));
      std::from_chars(raw[i].data(), raw[i].data() + raw[i].size(), v[i]);
    }

    Element e{*category, int(v[0]), int(v[1]), int(v[2]), int(v[3])};
    if (v[0] + v[2] > canvas.width || v[1] + v[3] > canvas.height) {
      overflow = true;
      if (overflow_detail.empty())
        overflow_detail = "element exceeds canvas bounds";
    }
    elements.push_back(e);
  }

  if (overflow) return fail(FailureKind::Overflow, overflow_detail);

  ParseOutcome out;
  Layout layout;
  layout.canvas = canvas;
  layout.elements = std::move(elements);
  out.layout = std::move(layout);
  return out;
}

std::string join_texts(const std::vector<std::string>& texts) {
  std::string out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (i) out += " & ";
    out += texts[i];
  }
  return out;
}

std::string assemble_prompt(const PromptParts& parts) {
  std::string out;
  out += "Task Definition\n";
  out += parts.task_definition;
  out += "\n\n";
  if (parts.text_constraint) {
    out += "Text Constraint\n";
    out += "Text :  ";
    out += *parts.text_constraint;
    out += "\n\n";
  }
  out += "HTML Format\n";
  out += "###bbox html:\n";
  out += parts.html_body;
  return out;
}

}  // namespace posterkit::codec
