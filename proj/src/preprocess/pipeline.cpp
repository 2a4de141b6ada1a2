#include "safechat/error.hpp"
#include "safechat/preprocess.hpp"
#include "safechat/text.hpp"

namespace safechat::preprocess {

namespace {

template <class T>
const T& require(const std::shared_ptr<const T>& res, Step step) {
  if (!res) {
    throw Error(Errc::resource_missing,
                "step '" + std::string(step_name(step)) + "' is enabled but its lexicon is not loaded");
  }
  return *res;
}

}  // namespace

NormalizedText preprocess_pipeline(std::string_view input, const PipelineConfig& config,
                                   const Resources& resources) {
  const PipelineConfig cfg = config.effective();
  const bool ner = cfg.mode == Mode::ner;
  NormalizedText out;
  std::string s(input);

  if (cfg.contractions) {
    s = expand_contractions(s, require(resources.contractions, Step::contractions));
    out.steps_applied.push_back(Step::contractions);
  }
  if (cfg.special_chars) {
    // Date and clock separators carry entity information in NER mode.
    s = strip_special_chars(s, ner ? ":/-" : "");
    out.steps_applied.push_back(Step::special_chars);
  }
  if (cfg.lowercase) {
    s = text::to_lower(s);
    out.steps_applied.push_back(Step::lowercase);
  }

  if (cfg.spelling || cfg.negation || cfg.lemmatize) {
    auto tokens = tokenize(s);
    if (cfg.spelling) {
      const auto& dict = require(resources.frequencies, Step::spelling);
      for (auto& t : tokens) {
        if (ner && text::starts_with_upper(t)) continue;  // proper nouns are exempt
        t = correct_spelling(t, dict);
      }
      out.steps_applied.push_back(Step::spelling);
    }
    if (cfg.negation) {
      tokens = handle_negation(std::move(tokens), require(resources.antonyms, Step::negation),
                               resources.lemmas.get());
      out.steps_applied.push_back(Step::negation);
    }
    if (cfg.lemmatize) {
      tokens = lemmatize(std::move(tokens), require(resources.lemmas, Step::lemmatize));
      out.steps_applied.push_back(Step::lemmatize);
    }
    s = detokenize(tokens);
  }

  out.text = std::move(s);
  return out;
}

}  // namespace safechat::preprocess
