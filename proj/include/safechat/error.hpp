#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safechat {

enum class Errc {
  resource_missing,
  empty_corpus,
  invalid_config,
  vocabulary_mismatch,
  single_class,
  non_finite_feature,
  dimension_mismatch,
  empty_class,
  class_too_small,
  empty_test_set,
  empty_gazetteer,
  empty_intents,
  terminal_state,
  unknown_session,
  expired_session,
  session_ended,
  capacity,
  io,
  parse,
  bad_format,
};

std::string_view errc_name(Errc code) noexcept;

// All library failures are reported as Error; code() identifies the contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace safechat
