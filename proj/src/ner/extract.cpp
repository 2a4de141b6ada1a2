#include <algorithm>

#include "safechat/ner.hpp"

namespace safechat::ner {

namespace {

int location_rank(const EntitySpan& s) {
  switch (s.source) {
    case SpanSource::gazetteer: return 0;
    case SpanSource::suffix_cue: return 1;
    case SpanSource::kb_confirmed: return 2;
    default: return 3;
  }
}

int date_rank(const EntitySpan& s) {
  const bool resolved = s.date() != nullptr && s.date()->resolved();
  const int base = s.source == SpanSource::relative_date ? 1 : 0;
  return resolved ? base : 2 + base;
}

int time_rank(const EntitySpan& s) { return s.source == SpanSource::clock ? 0 : 1; }

template <class Rank>
std::optional<EntitySpan> best(const std::vector<EntitySpan>& spans, EntityKind kind, Rank rank) {
  const EntitySpan* pick = nullptr;
  for (const auto& s : spans) {
    if (s.kind != kind) continue;
    // Spans arrive in position order, so strict comparison keeps the leftmost on ties.
    if (pick == nullptr || rank(s) < rank(*pick)) pick = &s;
  }
  if (pick == nullptr) return std::nullopt;
  return *pick;
}

}  // namespace

SlotExtraction extract_all(std::string_view text, const TemporalRef& ref,
                           const Gazetteer& gazetteer, KBClient* client) {
  auto dates = extract_dates(text, ref);
  auto times = extract_times(text);
  auto places = extract_locations(text, gazetteer);

  // Month and weekday words are never places; a place overlapping a temporal span is dropped.
  std::erase_if(places, [&](const EntitySpan& p) {
    auto hit = [&](const EntitySpan& t) { return t.overlaps(p); };
    return std::any_of(dates.begin(), dates.end(), hit) ||
           std::any_of(times.begin(), times.end(), hit);
  });
  if (client != nullptr) places = kb_relabel(std::move(places), *client);

  SlotExtraction out;
  out.all.reserve(dates.size() + times.size() + places.size());
  for (auto* group : {&places, &dates, &times}) {
    out.all.insert(out.all.end(), group->begin(), group->end());
  }
  std::stable_sort(out.all.begin(), out.all.end(),
                   [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });

  out.location = best(out.all, EntityKind::location, location_rank);
  out.date = best(out.all, EntityKind::date, date_rank);
  out.time = best(out.all, EntityKind::time, time_rank);
  return out;
}

}  // namespace safechat::ner
