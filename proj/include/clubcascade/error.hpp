#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clubcascade {

enum class Errc {
  not_positive_definite,
  dimension_mismatch,
  no_convergence,
  infeasible_mode,
  degenerate_pool,
  duplicate_items,
  pool_too_small,
  inconsistent_outcome,
  delta_too_large,
  hypothesis_violated,
  parse_error,
  empty_input,
  too_few_users,
  invalid_config,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Warnings go to stderr unless silenced (tests silence them).
void warn(std::string_view message);
void set_warnings_enabled(bool enabled) noexcept;

}  // namespace clubcascade
