#include <string>

#include "safechat/preprocess.hpp"
#include "safechat/text.hpp"

namespace safechat::preprocess {

namespace {

constexpr char32_t kRightQuote = 0x2019;

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == kRightQuote; }

bool is_contraction_char(char32_t cp) {
  return text::is_letter_codepoint(cp) || (cp >= '0' && cp <= '9') || is_apostrophe(cp);
}

bool is_sentence_punct(char c) { return c == '.' || c == ',' || c == '?' || c == '!'; }

// Lowercased key with U+2019 folded to an ASCII apostrophe.
std::string contraction_key(std::string_view word) {
  std::string key;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t start = i;
    const char32_t cp = text::next_codepoint(word, i);
    if (cp == kRightQuote) {
      key += '\'';
    } else {
      for (std::size_t k = start; k < i; ++k) key += text::to_lower(word[k]);
    }
  }
  return key;
}

std::string match_case(std::string_view surface, std::string_view expansion) {
  std::size_t letters = 0;
  std::size_t upper = 0;
  for (char c : surface) {
    if (text::is_ascii_alpha(c)) {
      ++letters;
      if (text::is_upper(c)) ++upper;
    }
  }
  std::string out(expansion);
  if (letters > 1 && upper == letters) {
    for (char& c : out) c = text::to_upper(c);
  } else if (!surface.empty() && text::is_upper(surface.front()) && !out.empty()) {
    out.front() = text::to_upper(out.front());
  }
  return out;
}

void edits1(const std::string& w, const auto& visit) {
  static constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyz";
  const std::size_t n = w.size();
  std::string e;
  for (std::size_t i = 0; i < n; ++i) {  // deletes
    e = w;
    e.erase(i, 1);
    visit(e);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {  // adjacent transposes
    e = w;
    std::swap(e[i], e[i + 1]);
    visit(e);
  }
  for (std::size_t i = 0; i < n; ++i) {  // substitutions
    for (char c : kAlphabet) {
      if (c == w[i]) continue;
      e = w;
      e[i] = c;
      visit(e);
    }
  }
  for (std::size_t i = 0; i <= n; ++i) {  // inserts
    for (char c : kAlphabet) {
      e = w;
      e.insert(e.begin() + static_cast<std::ptrdiff_t>(i), c);
      visit(e);
    }
  }
}

struct Best {
  std::string word;
  std::uint64_t count = 0;

  void offer(const std::string& candidate, std::uint64_t c) {
    if (c == 0) return;
    if (c > count || (c == count && candidate < word)) {
      word = candidate;
      count = c;
    }
  }
};

}  // namespace

std::string expand_contractions(std::string_view text, const ContractionTable& table) {
  std::string out;
  out.reserve(text.size() + 16);
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    const char32_t cp = text::next_codepoint(text, j);
    if (!is_contraction_char(cp)) {
      out.append(text.substr(i, j - i));
      i = j;
      continue;
    }
    // Maximal run of word characters starting at i.
    std::size_t end = i;
    while (end < text.size()) {
      std::size_t k = end;
      if (!is_contraction_char(text::next_codepoint(text, k))) break;
      end = k;
    }
    // Leading/trailing apostrophes act as quotes, not as part of the word.
    std::size_t wb = i;
    std::size_t we = end;
    auto leading_quote = [&](std::size_t pos, std::size_t& next) {
      next = pos;
      return is_apostrophe(text::next_codepoint(text, next));
    };
    std::size_t nxt = 0;
    while (wb < we && leading_quote(wb, nxt)) wb = nxt;
    while (we > wb) {
      if (text[we - 1] == '\'') {
        --we;
      } else if (we - wb >= 3 && text.substr(we - 3, 3) == "\xE2\x80\x99") {
        we -= 3;
      } else {
        break;
      }
    }
    const std::string_view word = text.substr(wb, we - wb);
    out.append(text.substr(i, wb - i));
    if (auto hit = word.empty() ? std::nullopt : table.find(contraction_key(word))) {
      out += match_case(word, *hit);
    } else {
      out.append(word);
    }
    out.append(text.substr(we, end - we));
    i = end;
  }
  return out;
}

std::string strip_special_chars(std::string_view text, std::string_view extra_keep) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  auto emit = [&](std::string_view piece) {
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out.append(piece);
  };
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t start = i;
    const char32_t cp = text::next_codepoint(text, i);
    const std::string_view piece = text.substr(start, i - start);
    bool keep = false;
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (text::is_space(c)) {
        pending_space = true;
        continue;
      }
      keep = text::is_ascii_alpha(c) || text::is_digit(c) || c == '\'' || is_sentence_punct(c) ||
             extra_keep.find(c) != std::string_view::npos;
    } else {
      keep = text::is_letter_codepoint(cp) || cp == kRightQuote;
    }
    if (keep) {
      emit(piece);
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::string correct_spelling(std::string_view token, const FrequencyDictionary& dict) {
  std::string word(token);
  if (!text::all_ascii_lower_alpha(word) || dict.contains(word)) return word;
  // Each edit changes the length by at most one, so longer tokens have no candidate.
  if (word.size() > dict.max_word_length() + 2) return word;
  if (auto hit = dict.cached_correction(word)) return *hit;

  Best best;
  edits1(word, [&](const std::string& e) { best.offer(e, dict.count(e)); });
  if (best.count == 0) {
    edits1(word, [&](const std::string& e1) {
      edits1(e1, [&](const std::string& e2) { best.offer(e2, dict.count(e2)); });
    });
  }
  std::string result = best.count > 0 ? best.word : word;
  dict.cache_correction(word, result);
  return result;
}

std::vector<std::string> handle_negation(std::vector<std::string> tokens, const AntonymLexicon& lex,
                                         const LemmaLexicon* lemmas) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] == "not" && i + 1 < tokens.size()) {
        const std::string next = text::to_lower(tokens[i + 1]);
        auto antonym = lex.find(next);
        if (!antonym && lemmas) antonym = lex.find(lemmas->lemma(next));
        if (antonym) {
          out.emplace_back(*antonym);
          ++i;
          changed = true;
          continue;
        }
      }
      out.push_back(std::move(tokens[i]));
    }
    tokens = std::move(out);
  }
  return tokens;
}

std::vector<std::string> lemmatize(std::vector<std::string> tokens, const LemmaLexicon& lex) {
  for (auto& t : tokens) {
    if (auto hit = lex.find(t)) t = std::string(*hit);
  }
  return tokens;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& chunk : text::split_whitespace(s)) {
    std::size_t b = 0;
    std::size_t e = chunk.size();
    while (b < e && is_sentence_punct(chunk[b])) out.emplace_back(1, chunk[b++]);
    std::size_t tail = e;
    while (tail > b && is_sentence_punct(chunk[tail - 1])) --tail;
    if (tail > b) out.emplace_back(chunk.substr(b, tail - b));
    for (std::size_t k = tail; k < e; ++k) out.emplace_back(1, chunk[k]);
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    const bool punct = t.size() == 1 && is_sentence_punct(t[0]);
    if (!out.empty() && !punct) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace safechat::preprocess
