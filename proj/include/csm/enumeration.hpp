#pragma once

// Brute-force ground truth for small instances: every stable partial
// matching, plus trial-averaged statistics over random instances.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csm/instance.hpp"
#include "csm/matching.hpp"
#include "csm/stats.hpp"

namespace csm {

inline constexpr std::size_t kDefaultEnumerationCap = 7;

struct StableSet {
  std::vector<Matching> stable_matchings;
  std::vector<RankTotals> ranks;  // parallel to stable_matchings
  std::size_t complete_count = 0;  // S
  std::vector<std::size_t> matched_men;    // T1 of the first matching
  std::vector<std::size_t> matched_women;  // T2 of the first matching
  bool matched_sets_agree = true;  // T1, T2 identical across all matchings
  std::uint64_t Q_minus = 0, Q_plus = 0;
  std::uint64_t R_minus = 0, R_plus = 0;
};

/// All stable partial matchings. Depth-first over men in index order; each
/// man is left single or given an admissible unused woman. A branch is cut as
/// soon as a blocking pair appears among people whose partners are final
/// (processed men, taken women). Leaves are checked with verify_stable.
/// Throws std::invalid_argument when n exceeds `cap`.
StableSet enumerate_stable(const DenseInstance& inst, std::size_t cap = kDefaultEnumerationCap);

enum class Statistic { S_complete, matched_size, Q_minus, Q_plus, exists_complete };

const char* to_string(Statistic s);

enum class Mode { dense, lazy };

const char* to_string(Mode m);

/// Mean and se of a statistic over `trials` independent instances; trial t
/// uses generate_dense(n, p, spec.child(t)). matched_size comes from
/// propose(men); the others require enumeration and respect the cap.
MCEstimate empirical_expectation(std::size_t n, double p, std::uint64_t trials, StreamSpec spec,
                                 Statistic statistic, unsigned threads = 1,
                                 std::size_t cap = kDefaultEnumerationCap);

/// Entry k (0 <= k <= n*n): expected number of complete stable matchings
/// whose total wife-rank equals k.
std::vector<MCEstimate> empirical_rank_counts(std::size_t n, double p, std::uint64_t trials, StreamSpec spec,
                                              unsigned threads = 1, std::size_t cap = kDefaultEnumerationCap);

/// Entry l (0 <= l <= n): empirical P(size of the men-proposing outcome = l).
/// Lazy mode draws trial t as LazyInstance(n, p, spec.child(t)).
std::vector<MCEstimate> empirical_size_distribution(std::size_t n, double p, std::uint64_t trials,
                                                    StreamSpec spec, Mode mode, unsigned threads = 1);

}  // namespace csm
