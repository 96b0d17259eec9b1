#pragma once

// Deferred-decision realization of the random instance for large n.
//
// Nothing is drawn up front. Each proposer walks a uniformly random
// permutation of the receivers, produced one element at a time by a sparse
// Fisher-Yates shuffle. Admissibility coins are drawn when first needed and
// logged. A receiver's score of a proposer is drawn when he proposes to her.
//
// The proposal run uses next_admissible(), which jumps over a geometric
// number of permutation positions whose coins come up inadmissible. The
// identities at those positions are never drawn: they are a uniform subset of
// the receivers not yet returned to that proposer. Because of this, memory
// stays O(n + admissible proposals).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "csm/instance.hpp"
#include "csm/rng.hpp"

namespace csm {

struct ProposalRecord {
  std::uint32_t proposer;
  std::uint32_t receiver;
  std::uint32_t position;  // 0-based position in the proposer's permutation
  double score;            // receiver's score of the proposer
};

class LazyInstance {
 public:
  LazyInstance(std::size_t n, double p, StreamSpec spec, Side proposers = Side::men);

  std::size_t n() const { return n_; }
  double p() const { return p_; }
  Side proposers() const { return proposers_; }
  const StreamSpec& spec() const { return stream_.spec(); }

  /// Next receiver in the proposer's permutation, uniform over the receivers
  /// not yet returned to him; nullopt once all n positions are consumed.
  std::optional<std::uint32_t> next_unproposed(std::uint32_t proposer);

  /// Admissibility of a pair. The first call resolves and logs the coin;
  /// later calls return the logged value. For a pair that may sit inside a
  /// skipped block the coin is drawn from its conditional law given the run
  /// so far, p * (n - positions) / (n - returned); otherwise it is Bernoulli(p).
  bool flip_admissible(std::uint32_t proposer, std::uint32_t receiver);

  /// Skip inadmissible positions and return the next admissible receiver,
  /// with its coin logged as admissible. nullopt when the list is exhausted.
  std::optional<std::uint32_t> next_admissible(std::uint32_t proposer);

  /// Draw the receiver's score of the proposer and log the proposal.
  double record_proposal(std::uint32_t proposer, std::uint32_t receiver);

  // Receiver state during a run.
  std::int32_t holder(std::uint32_t receiver) const { return holder_[receiver]; }
  double holder_score(std::uint32_t receiver) const { return holder_score_[receiver]; }
  void set_holder(std::uint32_t receiver, std::uint32_t proposer, double score);

  /// Positions of the permutation consumed (returned plus skipped).
  std::size_t positions_used(std::uint32_t proposer) const { return pos_[proposer]; }
  /// Receivers returned to this proposer so far.
  std::size_t returned(std::uint32_t proposer) const { return returned_[proposer]; }
  bool was_returned(std::uint32_t proposer, std::uint32_t receiver) const;
  /// Logged coin of a pair, if it has been resolved.
  std::optional<bool> logged_coin(std::uint32_t proposer, std::uint32_t receiver) const;

  /// Receiver-side rank of the holder: 1 + number of admissible proposers the
  /// receiver strictly prefers to him. Proposers that reached her are all
  /// worse than her final holder; the others are resolved here in aggregate by
  /// thinning a geometric scan over proposer indices, without logging.
  std::uint64_t receiver_rank(std::uint32_t receiver);

  const std::vector<ProposalRecord>& proposal_log() const { return log_; }

  void mark_run() { has_run_ = true; }
  bool has_run() const { return has_run_; }

  /// Rough heap footprint of the lazy state, in bytes.
  std::size_t approx_bytes() const;

  Stream& stream() { return stream_; }

 private:
  enum CoinBits : std::uint8_t { kReturned = 1, kFlipped = 2, kAdmissible = 4 };

  static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  std::uint32_t slot(std::uint32_t proposer, std::uint32_t index) const;

  std::size_t n_;
  double p_;
  Side proposers_;
  Stream stream_;
  bool has_run_ = false;

  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> returned_;
  std::unordered_map<std::uint64_t, std::uint32_t> displaced_;  // sparse Fisher-Yates
  std::unordered_map<std::uint64_t, std::uint8_t> coins_;
  std::vector<std::int32_t> holder_;
  std::vector<double> holder_score_;
  std::vector<ProposalRecord> log_;
};

enum class CoinPolicy { fresh, admissible };

/// Complete a finished lazy run into a DenseInstance consistent with
/// everything the run revealed. Skipped positions get random identities and
/// inadmissible coins; still-undetermined coins follow `policy` (fresh
/// Bernoulli(p) draws, or all admissible). Intended for small n: O(n^2).
DenseInstance materialize(const LazyInstance& lazy, CoinPolicy policy, StreamSpec spec);

}  // namespace csm
