#pragma once

#include "clubcascade/club.hpp"

#include <cstddef>
#include <string_view>

namespace clubcascade {

enum class BaselineKind {
  single_cluster,  // every user shares one estimate
  per_user,        // every user is its own cluster
};

std::string_view to_string(BaselineKind kind);

/// A ClubLearner with edge deletion disabled and a fixed initial graph:
/// complete for single_cluster, empty for per_user.
ClubLearner make_baseline(BaselineKind kind, ClubConfig cfg, std::size_t users);

}  // namespace clubcascade
