/* Copyright 2026 The recloop Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "recloop/grounding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "recloop/error.hpp"

namespace recloop {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

void skip_space(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && is_space(s[pos])) ++pos;
}

bool parse_number(std::string_view s, std::size_t& pos, double& out) {
  std::size_t p = pos;
  bool negative = false;
  if (p < s.size() && (s[p] == '+' || s[p] == '-')) {
    negative = s[p] == '-';
    ++p;
  }
  if (p >= s.size() || !(std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '.')) {
    return false;
  }
  const char* first = s.data() + p;
  const char* last = s.data() + s.size();
  double v = 0.0;
  auto res = std::from_chars(first, last, v, std::chars_format::general);
  if (res.ec != std::errc() || res.ptr == first) return false;
  out = negative ? -v : v;
  pos = static_cast<std::size_t>(res.ptr - s.data());
  return true;
}

// Parses "[a, b, c, d]" starting at the '[' at `pos`. Commas are optional
// between values. On success `pos` is one past the ']'.
bool parse_tuple(std::string_view s, std::size_t& pos, std::array<double, 4>& out) {
  if (pos >= s.size() || s[pos] != '[') return false;
  std::size_t p = pos + 1;
  for (int i = 0; i < 4; ++i) {
    skip_space(s, p);
    if (i > 0 && p < s.size() && s[p] == ',') {
      ++p;
      skip_space(s, p);
    }
    if (!parse_number(s, p, out[static_cast<std::size_t>(i)])) return false;
  }
  skip_space(s, p);
  if (p >= s.size() || s[p] != ']') return false;
  pos = p + 1;
  return true;
}

struct LineResult {
  std::optional<GroundedEntry> entry;
  std::string problem;
};

LineResult parse_entry_line(std::string_view line, std::optional<ImageSize> size) {
  std::size_t p = 0;
  if (p >= line.size() || !std::isdigit(static_cast<unsigned char>(line[p]))) {
    return {std::nullopt, "missing item number"};
  }
  int index = 0;
  auto res = std::from_chars(line.data(), line.data() + line.size(), index);
  if (res.ec != std::errc() || index < 1) return {std::nullopt, "bad item number"};
  p = static_cast<std::size_t>(res.ptr - line.data());
  skip_space(line, p);
  if (p >= line.size() || (line[p] != '.' && line[p] != ')' && line[p] != ':')) {
    return {std::nullopt, "missing '.' after item number"};
  }
  ++p;
  const std::string_view rest = line.substr(p);
  const std::size_t open = rest.rfind('[');
  if (open == std::string_view::npos) return {std::nullopt, "missing bounding box"};
  std::size_t q = open;
  std::array<double, 4> raw{};
  if (!parse_tuple(rest, q, raw)) return {std::nullopt, "malformed bounding box"};
  std::string_view tail = trim(rest.substr(q));
  if (!tail.empty() && tail != "." && tail != ",") {
    return {std::nullopt, "unexpected text after bounding box"};
  }
  // Kept verbatim (bar surrounding whitespace) so serialized lists round-trip.
  const std::string_view desc = trim(rest.substr(0, open));
  if (desc.empty()) return {std::nullopt, "empty description"};
  NormBox box;
  try {
    box = sanitize(raw, size);
  } catch (const ParseError& e) {
    return {std::nullopt, e.what()};
  }
  return {GroundedEntry{index, std::string(desc), box}, {}};
}

std::string one_line(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : trim(text)) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

GroundedParse parse_grounded(std::string_view reply, int expected_count,
                             ParsePolicy policy, std::optional<ImageSize> image_size) {
  if (expected_count < 0) throw UsageError("expected_count must be >= 0");
  GroundedParse out;
  const std::size_t cap = static_cast<std::size_t>(expected_count) + kRunawayMargin;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= reply.size()) {
    std::size_t end = reply.find('\n', start);
    if (end == std::string_view::npos) end = reply.size();
    const std::string_view line = trim(reply.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;

    LineResult r = parse_entry_line(line, image_size);
    if (r.entry && !out.grounded.entries.empty() &&
        r.entry->index <= out.grounded.entries.back().index) {
      r = {std::nullopt, "item number does not increase"};
    }
    if (!r.entry) {
      const std::string msg =
          "line " + std::to_string(line_no) + ": " + r.problem + ": " + std::string(line);
      if (policy == ParsePolicy::kStrict) throw ParseError(msg);
      out.warnings.push_back("skipped " + msg);
      continue;
    }
    if (out.grounded.entries.size() >= cap) {
      out.warnings.push_back("truncated runaway list at " + std::to_string(cap) +
                             " entries");
      break;
    }
    out.grounded.entries.push_back(std::move(*r.entry));
  }
  const auto n = static_cast<int>(out.grounded.entries.size());
  if (n == 0 && policy == ParsePolicy::kStrict) {
    throw ParseError("no grounded entries in reply");
  }
  if (n == 0) {
    out.warnings.push_back("no grounded entries parsed");
  } else if (n < expected_count) {
    out.warnings.push_back("parsed " + std::to_string(n) + " of " +
                           std::to_string(expected_count) + " requested entries");
  }
  return out;
}

std::string serialize_grounded(const GroundedDescription& g) {
  std::string out;
  for (const auto& e : g.entries) {
    if (!out.empty()) out += '\n';
    out += std::to_string(e.index) + ". " + e.description + " " + format_box(e.box, 2);
  }
  return out;
}

std::string strip_boxes(const GroundedDescription& g) {
  std::string out;
  for (const auto& e : g.entries) {
    if (!out.empty()) out += '\n';
    std::string desc = e.description;
    std::erase_if(desc, [](char c) { return c == '[' || c == ']'; });
    out += std::to_string(e.index) + ". " + desc;
  }
  return out;
}

std::string rec_instruction(std::string_view expression, bool has_context,
                            bool has_rejected) {
  std::string out;
  if (has_context) {
    out += "Use the numbered list of objects above as reference.";
    if (has_rejected) {
      out += " Entries marked as rejected were predicted before and do not match "
             "the description.";
    }
    out += '\n';
  }
  out += "Locate the object described as \"";
  out += expression;
  out += "\". Output its bounding box as four normalized coordinates (top-left x, "
         "top-left y, bottom-right x, bottom-right y) between 0 and 1, enclosed in "
         "square brackets.";
  return out;
}

std::string assemble_context(const RecContext& ctx) {
  std::string lines =
      ctx.include_boxes ? serialize_grounded(ctx.grounded) : strip_boxes(ctx.grounded);
  int next = ctx.grounded.empty() ? 1 : ctx.grounded.entries.back().index + 1;
  for (const auto& r : ctx.appended) {
    if (!lines.empty()) lines += '\n';
    lines += std::to_string(next++) + ". " + one_line(r.caption) + " " +
             format_box(r.box, 2) + " (previously predicted, rejected)";
  }
  const std::string instruction =
      rec_instruction(ctx.expression, !lines.empty(), !ctx.appended.empty());
  if (lines.empty()) return instruction;
  return lines + "\n\n" + instruction;
}

std::vector<std::array<double, 4>> find_box_tuples(std::string_view text) {
  std::vector<std::array<double, 4>> out;
  for (std::size_t p = text.find('['); p != std::string_view::npos;
       p = text.find('[', p + 1)) {
    std::size_t q = p;
    std::array<double, 4> raw{};
    if (parse_tuple(text, q, raw)) out.push_back(raw);
  }
  return out;
}

NormBox parse_bbox_reply(std::string_view reply, std::optional<ImageSize> image_size) {
  for (std::size_t p = reply.find('['); p != std::string_view::npos;
       p = reply.find('[', p + 1)) {
    std::size_t q = p;
    std::array<double, 4> raw{};
    if (parse_tuple(reply, q, raw)) return sanitize(raw, image_size);
  }
  throw ParseError("no bounding box in reply: " + std::string(reply));
}

bool parse_yes_no(std::string_view reply) {
  const std::string text = lower(reply);
  std::vector<std::string_view> tokens;
  std::string_view view(text);
  std::size_t i = 0;
  while (i < view.size()) {
    while (i < view.size() && !std::isalpha(static_cast<unsigned char>(view[i]))) ++i;
    std::size_t j = i;
    while (j < view.size() && std::isalpha(static_cast<unsigned char>(view[j]))) ++j;
    if (j > i) tokens.push_back(view.substr(i, j - i));
    i = j;
  }
  if (!tokens.empty() && (tokens.front() == "yes" || tokens.front() == "no")) {
    return tokens.front() == "yes";
  }
  for (auto t : tokens) {
    if (t == "yes" || t == "no") return t == "yes";
  }
  const auto yes = text.find("yes");
  const auto no = text.find("no");
  if (yes != std::string::npos || no != std::string::npos) return yes < no;
  throw ParseError("reply is neither yes nor no: " + std::string(reply));
}

}  // namespace recloop
