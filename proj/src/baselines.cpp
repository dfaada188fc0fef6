#include "clubcascade/baselines.hpp"

namespace clubcascade {

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::single_cluster: return "single_cluster";
    case BaselineKind::per_user: return "per_user";
  }
  return "unknown";
}

ClubLearner make_baseline(BaselineKind kind, ClubConfig cfg, std::size_t users) {
  cfg.alpha = kNoDeletion;
  cfg.init = kind == BaselineKind::single_cluster ? GraphInit::complete() : GraphInit::empty();
  return ClubLearner(std::move(cfg), users);
}

}  // namespace clubcascade
