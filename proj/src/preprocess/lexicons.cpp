#include <algorithm>
#include <charconv>
#include <mutex>
#include <shared_mutex>

#include "safechat/error.hpp"
#include "safechat/io.hpp"
#include "safechat/preprocess.hpp"
#include "safechat/text.hpp"

namespace safechat::preprocess {

std::string_view step_name(Step step) noexcept {
  switch (step) {
    case Step::contractions: return "contractions";
    case Step::special_chars: return "special_chars";
    case Step::lowercase: return "lowercase";
    case Step::spelling: return "spelling";
    case Step::negation: return "negation";
    case Step::lemmatize: return "lemmatize";
  }
  return "?";
}

WordMap::WordMap(std::vector<std::pair<std::string, std::string>> entries) {
  for (auto& [k, v] : entries) {
    auto key = text::to_lower(text::trim(k));
    auto value = std::string(text::trim(v));
    if (key.empty() || value.empty()) throw Error(Errc::parse, "empty lexicon entry");
    map_.insert_or_assign(std::move(key), std::move(value));
  }
}

std::optional<std::string_view> WordMap::find(std::string_view lowercase_key) const {
  auto it = map_.find(std::string(lowercase_key));
  if (it == map_.end()) return std::nullopt;
  return std::string_view(it->second);
}

ContractionTable::ContractionTable(std::vector<std::pair<std::string, std::string>> entries)
    : WordMap(std::move(entries)) {
  for (const auto& [k, v] : map_) {
    if (text::to_lower(v) == k) throw Error(Errc::parse, "contraction maps to itself: " + k);
  }
}

ContractionTable ContractionTable::load(const std::filesystem::path& path) {
  return ContractionTable(io::read_tsv_pairs(path));
}

AntonymLexicon AntonymLexicon::load(const std::filesystem::path& path) {
  return AntonymLexicon(io::read_tsv_pairs(path));
}

LemmaLexicon LemmaLexicon::load(const std::filesystem::path& path) {
  return LemmaLexicon(io::read_tsv_pairs(path));
}

std::string_view LemmaLexicon::lemma(std::string_view token) const {
  auto hit = find(token);
  return hit ? *hit : token;
}

struct FrequencyDictionary::CorrectionCache {
  // Reset when full; corrections are cheap to recompute and the working set is small.
  static constexpr std::size_t kCapacity = 1 << 17;
  std::shared_mutex mutex;
  std::unordered_map<std::string, std::string> map;
};

FrequencyDictionary::FrequencyDictionary(std::vector<std::pair<std::string, std::uint64_t>> entries)
    : cache_(std::make_shared<CorrectionCache>()) {
  for (auto& [w, c] : entries) {
    if (c == 0) throw Error(Errc::parse, "frequency count must be positive: " + w);
    auto key = text::to_lower(w);
    max_length_ = std::max(max_length_, key.size());
    counts_.insert_or_assign(std::move(key), c);
  }
}

std::optional<std::string> FrequencyDictionary::cached_correction(const std::string& word) const {
  if (!cache_) return std::nullopt;
  std::shared_lock lock(cache_->mutex);
  const auto it = cache_->map.find(word);
  if (it == cache_->map.end()) return std::nullopt;
  return it->second;
}

void FrequencyDictionary::cache_correction(const std::string& word, const std::string& correction) const {
  if (!cache_) return;
  std::unique_lock lock(cache_->mutex);
  if (cache_->map.size() >= CorrectionCache::kCapacity) cache_->map.clear();
  cache_->map.insert_or_assign(word, correction);
}

FrequencyDictionary FrequencyDictionary::load(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (auto& [w, c] : io::read_tsv_pairs(path)) {
    std::uint64_t n = 0;
    const auto digits = text::trim(c);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw Error(Errc::parse, path.string() + ": bad count for '" + w + "'");
    }
    entries.emplace_back(std::move(w), n);
  }
  return FrequencyDictionary(std::move(entries));
}

std::uint64_t FrequencyDictionary::count(std::string_view word) const {
  auto it = counts_.find(std::string(word));
  return it == counts_.end() ? 0 : it->second;
}

PipelineConfig PipelineConfig::ner_defaults() {
  PipelineConfig c;
  c.contractions = true;
  c.special_chars = false;
  c.spelling = false;
  c.negation = false;
  c.lemmatize = false;
  c.lowercase = false;
  c.mode = Mode::ner;
  return c;
}

PipelineConfig PipelineConfig::identity() {
  PipelineConfig c;
  c.contractions = c.special_chars = c.spelling = c.negation = c.lemmatize = c.lowercase = false;
  return c;
}

PipelineConfig PipelineConfig::effective() const {
  PipelineConfig c = *this;
  if (c.mode == Mode::ner) c.lowercase = false;
  return c;
}

Resources Resources::load_directory(const std::filesystem::path& dir) {
  Resources r;
  r.contractions = std::make_shared<ContractionTable>(ContractionTable::load(dir / "contractions.tsv"));
  r.frequencies = std::make_shared<FrequencyDictionary>(FrequencyDictionary::load(dir / "frequency.tsv"));
  r.antonyms = std::make_shared<AntonymLexicon>(AntonymLexicon::load(dir / "antonyms.tsv"));
  r.lemmas = std::make_shared<LemmaLexicon>(LemmaLexicon::load(dir / "lemmas.tsv"));
  return r;
}

}  // namespace safechat::preprocess
