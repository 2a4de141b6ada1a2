#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "safechat/ner.hpp"

namespace safechat::ner::detail {

template <class Normalized>
EntitySpan make_span(std::string_view text, const std::vector<Token>& tokens, std::size_t first,
                     std::size_t last, EntityKind kind, SpanSource source, Normalized value) {
  EntitySpan s;
  s.kind = kind;
  s.begin = tokens[first].begin;
  s.end = tokens[last].end;
  s.surface = std::string(text.substr(s.begin, s.end - s.begin));
  s.source = source;
  s.normalized = std::move(value);
  return s;
}

// Locations and candidates normalize to their own surface unless a canonical name is known.
inline EntitySpan make_span(std::string_view text, const std::vector<Token>& tokens,
                            std::size_t first, std::size_t last, EntityKind kind,
                            SpanSource source) {
  auto s = make_span(text, tokens, first, last, kind, source, std::string());
  s.normalized = s.surface;
  return s;
}

// Longest first, then leftmost, then by source order (SpanSource lists stronger sources
// first). Result is sorted by position.
inline std::vector<EntitySpan> resolve_overlaps(std::vector<EntitySpan> found) {
  std::sort(found.begin(), found.end(), [](const EntitySpan& a, const EntitySpan& b) {
    const auto la = a.end - a.begin;
    const auto lb = b.end - b.begin;
    if (la != lb) return la > lb;
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.source < b.source;
  });
  std::vector<EntitySpan> kept;
  for (auto& s : found) {
    const bool clash = std::any_of(kept.begin(), kept.end(),
                                   [&](const EntitySpan& k) { return k.overlaps(s); });
    if (!clash) kept.push_back(std::move(s));
  }
  std::sort(kept.begin(), kept.end(),
            [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });
  return kept;
}

template <std::size_t N>
bool in_list(const std::array<std::string_view, N>& list, std::string_view w) {
  return std::find(list.begin(), list.end(), w) != list.end();
}

}  // namespace safechat::ner::detail
