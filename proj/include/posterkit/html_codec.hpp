#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "posterkit/layout.hpp"

namespace posterkit::codec {

inline constexpr std::string_view kMaskToken = "<M>";

// Which attributes of one element render as <M>.
struct AttrMask {
  bool category = false;
  bool x = false;
  bool y = false;
  bool w = false;
  bool h = false;

  bool any() const { return category || x || y || w || h; }
  bool operator==(const AttrMask&) const = default;
};

// Serializes a layout into the HTML wire template. With masks, the
// flagged attributes render as <M>; masks must align 1:1 with elements.
// Throws std::invalid_argument on overflowing elements or a texts list
// that does not pair with the Text elements.
std::string serialize(const Layout& layout,
                      const std::optional<std::vector<AttrMask>>& masks = std::nullopt);

// Same template over masked elements directly (nullopt attribute -> <M>).
std::string serialize_masked(const Canvas& canvas,
                             const std::vector<MaskedElement>& elements);

enum class FailureKind { None, AbnormalFormat, Overflow };

struct ParseOutcome {
  std::optional<Layout> layout;  // set iff ok()
  FailureKind failure_kind = FailureKind::None;
  std::string detail;            // human-readable reason on failure

  bool ok() const { return failure_kind == FailureKind::None; }
};

// Lenient extraction of <rect ...> elements from arbitrary model output.
// Never throws on malformed input; every string maps to a success or a
// classified failure. Text outside the <html>...</html> span is ignored.
ParseOutcome parse(std::string_view text, const Canvas& canvas,
                   Profile profile = Profile::CGL);

struct PromptParts {
  std::string task_definition;
  // Already-joined constraint payload ("s1 & s2 & s3"); see join_texts.
  std::optional<std::string> text_constraint;
  std::string html_body;
};

std::string join_texts(const std::vector<std::string>& texts);

// Deterministic prompt assembly: task definition, optional text
// constraint, then the "###bbox html:" marker and the HTML body.
std::string assemble_prompt(const PromptParts& parts);

}  // namespace posterkit::codec
