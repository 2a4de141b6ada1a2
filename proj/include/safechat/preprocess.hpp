#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

// Text normalization applied before feature extraction (CLASSIFY mode) and, in a
// case-preserving reduced form, before entity extraction (NER mode).
namespace safechat::preprocess {

enum class Step { contractions, special_chars, lowercase, spelling, negation, lemmatize };

std::string_view step_name(Step step) noexcept;

struct NormalizedText {
  std::string text;
  std::vector<Step> steps_applied;  // canonical order
};

// Lowercase word -> value map loaded from a TSV resource.
class WordMap {
 public:
  WordMap() = default;
  explicit WordMap(std::vector<std::pair<std::string, std::string>> entries);

  std::optional<std::string_view> find(std::string_view lowercase_key) const;
  std::size_t size() const noexcept { return map_.size(); }
  bool empty() const noexcept { return map_.empty(); }

 protected:
  std::unordered_map<std::string, std::string> map_;
};

// Contracted surface form ("i'm", "im") -> expansion ("i am"). No key may map to itself.
class ContractionTable : public WordMap {
 public:
  ContractionTable() = default;
  explicit ContractionTable(std::vector<std::pair<std::string, std::string>> entries);
  static ContractionTable load(const std::filesystem::path& path);
};

class AntonymLexicon : public WordMap {
 public:
  using WordMap::WordMap;
  static AntonymLexicon load(const std::filesystem::path& path);
};

// Identity fallback for absent forms.
class LemmaLexicon : public WordMap {
 public:
  using WordMap::WordMap;
  static LemmaLexicon load(const std::filesystem::path& path);
  std::string_view lemma(std::string_view token) const;
};

class FrequencyDictionary {
 public:
  FrequencyDictionary() = default;
  explicit FrequencyDictionary(std::vector<std::pair<std::string, std::uint64_t>> entries);
  static FrequencyDictionary load(const std::filesystem::path& path);

  std::uint64_t count(std::string_view word) const;  // 0 when absent
  bool contains(std::string_view word) const { return count(word) > 0; }
  std::size_t size() const noexcept { return counts_.size(); }
  const std::unordered_map<std::string, std::uint64_t>& entries() const noexcept {
    return counts_;
  }
  std::size_t max_word_length() const noexcept { return max_length_; }

  // Memo for correct_spelling, shared by copies and safe to use from several threads.
  std::optional<std::string> cached_correction(const std::string& word) const;
  void cache_correction(const std::string& word, const std::string& correction) const;

 private:
  struct CorrectionCache;
  std::unordered_map<std::string, std::uint64_t> counts_;
  std::size_t max_length_ = 0;
  std::shared_ptr<CorrectionCache> cache_;
};

enum class Mode { classify, ner };

struct PipelineConfig {
  bool contractions = true;
  bool special_chars = true;
  bool spelling = true;
  bool negation = true;
  bool lemmatize = true;
  bool lowercase = true;
  Mode mode = Mode::classify;

  static PipelineConfig classify_defaults() { return {}; }
  // Contraction expansion and whitespace cleanup only; case is preserved.
  static PipelineConfig ner_defaults();
  static PipelineConfig identity();

  // NER mode forces lowercase off.
  PipelineConfig effective() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Shared immutable lexicons. Any member may be absent; the pipeline reports
// resource_missing when an enabled step needs one.
struct Resources {
  std::shared_ptr<const ContractionTable> contractions;
  std::shared_ptr<const FrequencyDictionary> frequencies;
  std::shared_ptr<const AntonymLexicon> antonyms;
  std::shared_ptr<const LemmaLexicon> lemmas;

  // Loads contractions.tsv, frequency.tsv, antonyms.tsv and lemmas.tsv from dir.
  static Resources load_directory(const std::filesystem::path& dir);
};

std::string expand_contractions(std::string_view text, const ContractionTable& table);

// Characters outside letters, digits, whitespace, apostrophe and ".,?!" (plus any in
// extra_keep) become a space; whitespace runs collapse to one space; result is trimmed.
std::string strip_special_chars(std::string_view text, std::string_view extra_keep = {});

// Out-of-dictionary lowercase token -> most frequent dictionary word at edit
// distance 1, else 2 (insert/delete/substitute/adjacent transpose over a-z).
// Ties go to the lexicographically smallest word.
std::string correct_spelling(std::string_view token, const FrequencyDictionary& dict);

// Replaces "not" + word by the word's antonym, repeated until no replacement applies.
// When lemmas is given, a successor without an antonym is retried through its lemma.
std::vector<std::string> handle_negation(std::vector<std::string> tokens, const AntonymLexicon& lex,
                                         const LemmaLexicon* lemmas = nullptr);

std::vector<std::string> lemmatize(std::vector<std::string> tokens, const LemmaLexicon& lex);

// Whitespace tokenization that also splits ".,?!" into their own tokens.
std::vector<std::string> tokenize(std::string_view text);
// Inverse of tokenize: single spaces, punctuation attached to the preceding token.
std::string detokenize(const std::vector<std::string>& tokens);

NormalizedText preprocess_pipeline(std::string_view text, const PipelineConfig& config,
                                   const Resources& resources);

}  // namespace safechat::preprocess
