#pragma once

// Nets, covers and balls over finite candidate sets.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "perfbandit/core.hpp"
#include "perfbandit/errors.hpp"

namespace perfbandit {

/// Net points are indices into the candidate list the net was built from.
struct Net {
  std::vector<std::size_t> indices;
  double radius = 0.0;

  [[nodiscard]] std::size_t size() const { return indices.size(); }
};

/// Greedy farthest-point r-cover. Starts from the first candidate and keeps adding the
/// candidate farthest from the current net until every candidate is within r. Ties go to the
/// lowest index. An infinite radius yields the single first candidate.
inline Net greedy_net(std::span<const ParameterVector> candidates, double r) {
  Net net;
  net.radius = r;
  if (candidates.empty()) return net;
  std::vector<double> dist(candidates.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (true) {
    const std::size_t added = next;
    net.indices.push_back(added);
    double far = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      dist[i] = std::min(dist[i], (candidates[i] - candidates[added]).norm());
      if (dist[i] > far) {
        far = dist[i];
        next = i;
      }
    }
    if (!(far > r)) break;
  }
  return net;
}

/// Largest distance from a candidate to its nearest net point.
inline double covering_radius(std::span<const ParameterVector> candidates, const Net& net) {
  double worst = 0.0;
  for (const auto& c : candidates) {
    double best = std::numeric_limits<double>::infinity();
    for (auto k : net.indices) best = std::min(best, (c - candidates[k]).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

/// Indices of candidates within distance r of center (inclusive).
inline std::vector<std::size_t> ball_members(std::span<const ParameterVector> candidates,
                                             const ParameterVector& center, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if ((candidates[i] - center).norm() <= r) out.push_back(i);
  }
  return out;
}

inline constexpr std::size_t kMaxExactCoverSize = 14;

/// All minimum-cardinality covers of an n-element set, where covers[i] is the bitmask of
/// elements that element i covers. Cover points are drawn from the set itself.
inline std::vector<std::vector<std::size_t>> minimum_covers_from_masks(
    std::span<const std::uint32_t> covers) {
  const std::size_t n = covers.size();
  if (n > kMaxExactCoverSize) {
    throw SizeLimitError("exact cover enumeration is capped at " +
                         std::to_string(kMaxExactCoverSize) +
                         " points; use greedy_net for larger sets");
  }
  std::vector<std::vector<std::size_t>> out;
  if (n == 0) return out;
  const std::uint32_t full = (n == 32) ? ~0U : ((1U << n) - 1U);
  for (std::size_t k = 1; k <= n && out.empty(); ++k) {
    // Gosper's hack over k-subsets.
    std::uint32_t subset = (1U << k) - 1U;
    while (subset <= full) {
      std::uint32_t covered = 0;
      for (std::uint32_t rest = subset; rest != 0; rest &= rest - 1) {
        covered |= covers[static_cast<std::size_t>(std::countr_zero(rest))];
      }
      if (covered == full) {
        std::vector<std::size_t> cover;
        for (std::uint32_t rest = subset; rest != 0; rest &= rest - 1) {
          cover.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
        }
        out.push_back(std::move(cover));
      }
      const std::uint32_t c = subset & (~subset + 1U);
      const std::uint32_t r = subset + c;
      if (r == 0) break;
      subset = (((r ^ subset) >> 2) / c) | r;
    }
  }
  return out;
}

/// Every r-cover of `candidates` (drawn from the candidates) of minimum cardinality.
inline std::vector<std::vector<std::size_t>> exact_minimal_covers(
    std::span<const ParameterVector> candidates, double r) {
  if (candidates.size() > kMaxExactCoverSize) {
    throw SizeLimitError("exact_minimal_covers accepts at most " +
                         std::to_string(kMaxExactCoverSize) +
                         " candidates; use greedy_net for larger sets");
  }
  std::vector<std::uint32_t> masks(candidates.size(), 0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if ((candidates[i] - candidates[j]).norm() <= r) masks[i] |= (1U << j);
    }
  }
  return minimum_covers_from_masks(masks);
}

}  // namespace perfbandit
