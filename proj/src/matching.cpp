#include "csm/matching.hpp"

#include <algorithm>
#include <stdexcept>

namespace csm {

Matching::Matching(std::size_t n) : wife_(n, -1), husband_(n, -1) {}

Matching Matching::from_pairs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Matching m(n);
  for (auto [man, woman] : pairs) m.add(man, woman);
  return m;
}

void Matching::add(std::size_t man, std::size_t woman) {
  if (man >= n() || woman >= n()) throw std::invalid_argument("Matching: index out of range");
  if (wife_[man] >= 0 || husband_[woman] >= 0)
    throw std::invalid_argument("Matching: person already matched");
  wife_[man] = static_cast<std::int32_t>(woman);
  husband_[woman] = static_cast<std::int32_t>(man);
  ++size_;
}

void Matching::remove_man(std::size_t man) {
  if (man >= n() || wife_[man] < 0) return;
  husband_[static_cast<std::size_t>(wife_[man])] = -1;
  wife_[man] = -1;
  --size_;
}

std::optional<std::size_t> Matching::wife_of(std::size_t man) const {
  if (wife_[man] < 0) return std::nullopt;
  return static_cast<std::size_t>(wife_[man]);
}

std::optional<std::size_t> Matching::husband_of(std::size_t woman) const {
  if (husband_[woman] < 0) return std::nullopt;
  return static_cast<std::size_t>(husband_[woman]);
}

std::vector<std::pair<std::size_t, std::size_t>> Matching::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < wife_.size(); ++i)
    if (wife_[i] >= 0) out.emplace_back(i, static_cast<std::size_t>(wife_[i]));
  return out;
}

std::vector<std::size_t> Matching::matched_men() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < wife_.size(); ++i)
    if (wife_[i] >= 0) out.push_back(i);
  return out;
}

std::vector<std::size_t> Matching::matched_women() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < husband_.size(); ++j)
    if (husband_[j] >= 0) out.push_back(j);
  return out;
}

namespace {

// Proposer a's score of receiver b, and receiver b's score of proposer a,
// for either orientation of the dense instance.
struct DenseView {
  const DenseInstance& inst;
  Side proposers;

  bool admissible(std::size_t a, std::size_t b) const {
    return proposers == Side::men ? inst.admissible(a, b) : inst.admissible(b, a);
  }
  double proposer_score(std::size_t a, std::size_t b) const {
    return proposers == Side::men ? inst.man_score(a, b) : inst.woman_score(b, a);
  }
  double receiver_score(std::size_t a, std::size_t b) const {
    return proposers == Side::men ? inst.woman_score(a, b) : inst.man_score(b, a);
  }
};

}  // namespace

MatchOutcome propose(const DenseInstance& inst, Side proposers) {
  const std::size_t n = inst.n();
  const DenseView view{inst, proposers};

  // Admissible receivers of each proposer, best first.
  std::vector<std::vector<std::uint32_t>> lists(n);
  for (std::size_t a = 0; a < n; ++a) {
    auto& list = lists[a];
    for (std::size_t b = 0; b < n; ++b)
      if (view.admissible(a, b)) list.push_back(static_cast<std::uint32_t>(b));
    std::sort(list.begin(), list.end(), [&](std::uint32_t l, std::uint32_t r) {
      return view.proposer_score(a, l) < view.proposer_score(a, r);
    });
  }

  std::vector<std::size_t> cursor(n, 0);
  std::vector<std::int32_t> holder(n, -1);
  std::uint64_t proposals = 0;
  for (std::size_t first = 0; first < n; ++first) {
    std::int64_t current = static_cast<std::int64_t>(first);
    while (current >= 0) {
      const auto a = static_cast<std::size_t>(current);
      if (cursor[a] == lists[a].size()) break;  // list exhausted: stays single
      const std::uint32_t b = lists[a][cursor[a]++];
      ++proposals;
      const std::int32_t h = holder[b];
      if (h < 0) {
        holder[b] = static_cast<std::int32_t>(a);
        current = -1;
      } else if (view.receiver_score(a, b) < view.receiver_score(static_cast<std::size_t>(h), b)) {
        holder[b] = static_cast<std::int32_t>(a);
        current = h;
      }
    }
  }

  Matching matching(n);
  for (std::size_t b = 0; b < n; ++b) {
    if (holder[b] < 0) continue;
    const auto a = static_cast<std::size_t>(holder[b]);
    if (proposers == Side::men)
      matching.add(a, b);
    else
      matching.add(b, a);
  }
  const RankTotals ranks = total_ranks(inst, matching);
  MatchOutcome out{std::move(matching), 0, proposals, ranks.wife_ranks, ranks.husband_ranks, proposers};
  out.size = out.matching.size();
  return out;
}

MatchOutcome propose(LazyInstance& inst, Side proposers) {
  if (inst.proposers() != proposers)
    throw std::invalid_argument("propose: lazy instance was built for the other proposing side");
  if (inst.has_run()) throw std::logic_error("propose: lazy instance already consumed");
  inst.mark_run();
  const std::size_t n = inst.n();

  std::vector<std::int32_t> partner(n, -1);
  std::vector<std::uint32_t> rank(n, 0);
  std::uint64_t proposals = 0;
  for (std::uint32_t first = 0; first < n; ++first) {
    std::int64_t current = first;
    while (current >= 0) {
      const auto a = static_cast<std::uint32_t>(current);
      const auto b = inst.next_admissible(a);
      if (!b) break;
      ++proposals;
      const double score = inst.record_proposal(a, *b);
      const std::int32_t h = inst.holder(*b);
      if (h >= 0 && !(score < inst.holder_score(*b))) continue;
      inst.set_holder(*b, a, score);
      partner[a] = static_cast<std::int32_t>(*b);
      rank[a] = static_cast<std::uint32_t>(inst.returned(a));
      current = -1;
      if (h >= 0) {
        partner[static_cast<std::size_t>(h)] = -1;
        current = h;
      }
    }
  }

  Matching matching(n);
  std::uint64_t proposer_ranks = 0;
  std::uint64_t receiver_ranks = 0;
  for (std::uint32_t a = 0; a < n; ++a) {
    if (partner[a] < 0) continue;
    const auto b = static_cast<std::size_t>(partner[a]);
    proposer_ranks += rank[a];
    if (proposers == Side::men)
      matching.add(a, b);
    else
      matching.add(b, a);
  }
  for (std::uint32_t b = 0; b < n; ++b)
    if (inst.holder(b) >= 0) receiver_ranks += inst.receiver_rank(b);

  MatchOutcome out{std::move(matching), 0, proposals, 0, 0, proposers};
  out.size = out.matching.size();
  out.wife_rank_total = proposers == Side::men ? proposer_ranks : receiver_ranks;
  out.husband_rank_total = proposers == Side::men ? receiver_ranks : proposer_ranks;
  return out;
}

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::both_matched: return "both_matched";
    case BlockKind::man_unmatched: return "man_unmatched";
    case BlockKind::woman_unmatched: return "woman_unmatched";
    case BlockKind::inadmissible_pair: return "inadmissible_pair";
  }
  return "?";
}

std::size_t BlockingReport::count(BlockKind k) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; }));
}

BlockingReport verify_stable(const DenseInstance& inst, const Matching& m) {
  const std::size_t n = inst.n();
  if (m.n() != n) throw std::invalid_argument("verify_stable: matching size differs from instance");
  BlockingReport report;
  for (auto [man, woman] : m.pairs())
    if (!inst.admissible(man, woman)) report.violations.push_back({man, woman, BlockKind::inadmissible_pair});

  for (std::size_t man = 0; man < n; ++man) {
    const std::int32_t wife = m.wife_index(man);
    for (std::size_t woman = 0; woman < n; ++woman) {
      if (!inst.admissible(man, woman) || wife == static_cast<std::int32_t>(woman)) continue;
      const bool man_wants =
          wife < 0 || inst.man_score(man, woman) < inst.man_score(man, static_cast<std::size_t>(wife));
      if (!man_wants) continue;
      const std::int32_t husband = m.husband_index(woman);
      const bool woman_wants =
          husband < 0 || inst.woman_score(man, woman) < inst.woman_score(static_cast<std::size_t>(husband), woman);
      if (!woman_wants) continue;
      BlockKind kind = BlockKind::both_matched;
      if (wife < 0)
        kind = BlockKind::man_unmatched;
      else if (husband < 0)
        kind = BlockKind::woman_unmatched;
      report.violations.push_back({man, woman, kind});
    }
  }
  return report;
}

std::uint64_t partner_rank(const DenseInstance& inst, const Matching& m, std::size_t person, Side side) {
  const std::size_t n = inst.n();
  if (person >= n) throw std::invalid_argument("partner_rank: index out of range");
  std::uint64_t rank = 1;
  if (side == Side::men) {
    const auto wife = m.wife_of(person);
    if (!wife) throw std::invalid_argument("partner_rank: man is unmatched");
    const double cut = inst.man_score(person, *wife);
    for (std::size_t w = 0; w < n; ++w)
      if (inst.admissible(person, w) && inst.man_score(person, w) < cut) ++rank;
  } else {
    const auto husband = m.husband_of(person);
    if (!husband) throw std::invalid_argument("partner_rank: woman is unmatched");
    const double cut = inst.woman_score(*husband, person);
    for (std::size_t h = 0; h < n; ++h)
      if (inst.admissible(h, person) && inst.woman_score(h, person) < cut) ++rank;
  }
  return rank;
}

RankTotals total_ranks(const DenseInstance& inst, const Matching& m) {
  RankTotals totals;
  for (auto [man, woman] : m.pairs()) {
    totals.wife_ranks += partner_rank(inst, m, man, Side::men);
    totals.husband_ranks += partner_rank(inst, m, woman, Side::women);
  }
  return totals;
}

}  // namespace csm
