#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "csm/instance.hpp"
#include "csm/lazy_instance.hpp"

namespace csm {

/// Partial matching between n men and n women, stored as partner arrays.
class Matching {
 public:
  explicit Matching(std::size_t n = 0);
  /// Throws std::invalid_argument on out-of-range indices or when a person
  /// appears in two pairs.
  static Matching from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

  void add(std::size_t man, std::size_t woman);
  void remove_man(std::size_t man);

  std::size_t n() const { return wife_.size(); }
  std::size_t size() const { return size_; }
  bool complete() const { return size_ == n(); }

  std::optional<std::size_t> wife_of(std::size_t man) const;
  std::optional<std::size_t> husband_of(std::size_t woman) const;
  std::int32_t wife_index(std::size_t man) const { return wife_[man]; }
  std::int32_t husband_index(std::size_t woman) const { return husband_[woman]; }

  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;
  /// T1 and T2: matched men and matched women, ascending.
  std::vector<std::size_t> matched_men() const;
  std::vector<std::size_t> matched_women() const;

  friend bool operator==(const Matching&, const Matching&) = default;

 private:
  std::vector<std::int32_t> wife_;
  std::vector<std::int32_t> husband_;
  std::size_t size_ = 0;
};

struct MatchOutcome {
  Matching matching;
  std::size_t size = 0;           // number of matched pairs
  std::uint64_t proposals = 0;    // admissible proposals made
  std::uint64_t wife_rank_total = 0;     // Q
  std::uint64_t husband_rank_total = 0;  // R
  Side proposer_side = Side::men;
};

/// Sequential proposal algorithm. Proposers are processed in index order and
/// a displaced proposer resumes at once, before the next one starts. Only
/// admissible proposals are made and counted. With men proposing the result
/// is the men-optimal stable matching.
MatchOutcome propose(const DenseInstance& inst, Side proposers);

/// Same algorithm on a lazily drawn instance; consumes the instance (one run
/// per instance, proposing side fixed at construction). Proposer-side ranks
/// are exact positions in the revealed admissible lists; receiver-side ranks
/// come from LazyInstance::receiver_rank.
MatchOutcome propose(LazyInstance& inst, Side proposers);

enum class BlockKind {
  both_matched,       // both matched, each prefers the other to the partner
  man_unmatched,      // man single; woman single or prefers him
  woman_unmatched,    // woman single; man prefers her to his wife
  inadmissible_pair,  // structural: a matched pair fails the admissibility test
};

const char* to_string(BlockKind k);

struct Violation {
  std::size_t man;
  std::size_t woman;
  BlockKind kind;
};

struct BlockingReport {
  std::vector<Violation> violations;

  bool stable() const { return violations.empty(); }
  std::size_t count(BlockKind k) const;
};

/// Every blocking pair and every inadmissible matched pair. Throws
/// std::invalid_argument if the matching's size differs from the instance.
BlockingReport verify_stable(const DenseInstance& inst, const Matching& m);

/// 1 + number of admissible opposite-side persons strictly preferred to the
/// partner. Throws std::invalid_argument when the person is unmatched.
std::uint64_t partner_rank(const DenseInstance& inst, const Matching& m, std::size_t person, Side side);

struct RankTotals {
  std::uint64_t wife_ranks = 0;     // Q
  std::uint64_t husband_ranks = 0;  // R
  friend bool operator==(const RankTotals&, const RankTotals&) = default;
};

RankTotals total_ranks(const DenseInstance& inst, const Matching& m);

}  // namespace csm
