#include "clubcascade/error.hpp"

#include <atomic>
#include <iostream>

namespace clubcascade {

namespace {
std::atomic<bool> g_warnings_enabled{true};
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::not_positive_definite: return "NotPositiveDefinite";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::no_convergence: return "NoConvergence";
    case Errc::infeasible_mode: return "InfeasibleMode";
    case Errc::degenerate_pool: return "DegeneratePool";
    case Errc::duplicate_items: return "DuplicateItems";
    case Errc::pool_too_small: return "PoolTooSmall";
    case Errc::inconsistent_outcome: return "InconsistentOutcome";
    case Errc::delta_too_large: return "DeltaTooLarge";
    case Errc::hypothesis_violated: return "HypothesisViolated";
    case Errc::parse_error: return "ParseError";
    case Errc::empty_input: return "EmptyInput";
    case Errc::too_few_users: return "TooFewUsers";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

void warn(std::string_view message) {
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) noexcept {
  g_warnings_enabled.store(enabled, std::memory_order_relaxed);
}

}  // namespace clubcascade
