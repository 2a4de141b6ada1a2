#include "safechat/error.hpp"

namespace safechat {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::resource_missing: return "resource_missing";
    case Errc::empty_corpus: return "empty_corpus";
    case Errc::invalid_config: return "invalid_config";
    case Errc::vocabulary_mismatch: return "vocabulary_mismatch";
    case Errc::single_class: return "single_class";
    case Errc::non_finite_feature: return "non_finite_feature";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::empty_class: return "empty_class";
    case Errc::class_too_small: return "class_too_small";
    case Errc::empty_test_set: return "empty_test_set";
    case Errc::empty_gazetteer: return "empty_gazetteer";
    case Errc::empty_intents: return "empty_intents";
    case Errc::terminal_state: return "terminal_state";
    case Errc::unknown_session: return "unknown_session";
    case Errc::expired_session: return "expired_session";
    case Errc::session_ended: return "session_ended";
    case Errc::capacity: return "capacity";
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::bad_format: return "bad_format";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

}  // namespace safechat
