#include "csm/lazy_instance.hpp"

#include <algorithm>
#include <stdexcept>

namespace csm {

LazyInstance::LazyInstance(std::size_t n, double p, StreamSpec spec, Side proposers)
    : n_(n), p_(p), proposers_(proposers), stream_(spec) {
  if (n == 0) throw std::invalid_argument("LazyInstance: n must be positive");
  if (n > 0xFFFFFFFEu) throw std::invalid_argument("LazyInstance: n too large");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("LazyInstance: p must lie in [0, 1]");
  pos_.assign(n, 0);
  returned_.assign(n, 0);
  holder_.assign(n, -1);
  holder_score_.assign(n, 1.0);
}

std::uint32_t LazyInstance::slot(std::uint32_t proposer, std::uint32_t index) const {
  auto it = displaced_.find(key(proposer, index));
  return it == displaced_.end() ? index : it->second;
}

std::optional<std::uint32_t> LazyInstance::next_unproposed(std::uint32_t proposer) {
  if (pos_[proposer] >= n_) return std::nullopt;
  const std::uint32_t k = returned_[proposer];
  const auto j = static_cast<std::uint32_t>(k + stream_.below(n_ - k));
  const std::uint32_t chosen = slot(proposer, j);
  if (j != k) displaced_[key(proposer, j)] = slot(proposer, k);
  displaced_.erase(key(proposer, k));
  ++returned_[proposer];
  ++pos_[proposer];
  coins_[key(proposer, chosen)] |= kReturned;
  return chosen;
}

bool LazyInstance::flip_admissible(std::uint32_t proposer, std::uint32_t receiver) {
  std::uint8_t& bits = coins_[key(proposer, receiver)];
  if (bits & kFlipped) return (bits & kAdmissible) != 0;
  double q = p_;
  const std::uint32_t pos = pos_[proposer];
  const std::uint32_t ret = returned_[proposer];
  if (!(bits & kReturned) && pos > ret)
    q = p_ * static_cast<double>(n_ - pos) / static_cast<double>(n_ - ret);
  const bool adm = stream_.bernoulli(q);
  bits |= kFlipped | (adm ? kAdmissible : 0);
  return adm;
}

std::optional<std::uint32_t> LazyInstance::next_admissible(std::uint32_t proposer) {
  const std::uint32_t pos = pos_[proposer];
  if (pos >= n_) return std::nullopt;
  const std::uint64_t skip = stream_.geometric_failures(p_);
  if (skip >= n_ - pos) {
    pos_[proposer] = static_cast<std::uint32_t>(n_);
    return std::nullopt;
  }
  pos_[proposer] = static_cast<std::uint32_t>(pos + skip);
  const std::uint32_t chosen = *next_unproposed(proposer);
  coins_[key(proposer, chosen)] |= kFlipped | kAdmissible;
  return chosen;
}

double LazyInstance::record_proposal(std::uint32_t proposer, std::uint32_t receiver) {
  const double score = stream_.uniform();
  log_.push_back({proposer, receiver, pos_[proposer] - 1, score});
  return score;
}

void LazyInstance::set_holder(std::uint32_t receiver, std::uint32_t proposer, double score) {
  holder_[receiver] = static_cast<std::int32_t>(proposer);
  holder_score_[receiver] = score;
}

bool LazyInstance::was_returned(std::uint32_t proposer, std::uint32_t receiver) const {
  auto it = coins_.find(key(proposer, receiver));
  return it != coins_.end() && (it->second & kReturned);
}

std::optional<bool> LazyInstance::logged_coin(std::uint32_t proposer, std::uint32_t receiver) const {
  auto it = coins_.find(key(proposer, receiver));
  if (it == coins_.end() || !(it->second & kFlipped)) return std::nullopt;
  return (it->second & kAdmissible) != 0;
}

std::uint64_t LazyInstance::receiver_rank(std::uint32_t receiver) {
  const std::int32_t h = holder_[receiver];
  if (h < 0) throw std::logic_error("receiver_rank: receiver is unmatched");
  // A proposer outranks the holder when the pair is admissible and her
  // (never drawn) score of him beats the holder's: probability
  // p * score * P(receiver lies beyond his consumed positions).
  const double q = p_ * holder_score_[receiver];
  std::uint64_t better = 0;
  std::uint64_t idx = 0;
  for (;;) {
    const std::uint64_t skip = stream_.geometric_failures(q);
    if (skip >= n_ - idx) break;
    idx += skip;
    const auto m = static_cast<std::uint32_t>(idx);
    ++idx;
    if (static_cast<std::int32_t>(m) != h && !was_returned(m, receiver)) {
      const double beyond = static_cast<double>(n_ - pos_[m]) / static_cast<double>(n_ - returned_[m]);
      if (stream_.uniform() < beyond) ++better;
    }
  }
  return 1 + better;
}

std::size_t LazyInstance::approx_bytes() const {
  constexpr std::size_t kNode = 48;  // typical unordered_map node plus bucket share
  return pos_.capacity() * sizeof(std::uint32_t) + returned_.capacity() * sizeof(std::uint32_t) +
         holder_.capacity() * sizeof(std::int32_t) + holder_score_.capacity() * sizeof(double) +
         log_.capacity() * sizeof(ProposalRecord) +
         (displaced_.size() + coins_.size()) * kNode +
         (displaced_.bucket_count() + coins_.bucket_count()) * sizeof(void*);
}

DenseInstance materialize(const LazyInstance& lazy, CoinPolicy policy, StreamSpec spec) {
  if (!lazy.has_run()) throw std::logic_error("materialize: lazy instance has not been run");
  const std::size_t n = lazy.n();
  Stream rng(spec);
  constexpr std::uint32_t kUnset = 0xFFFFFFFFu;

  std::vector<std::vector<const ProposalRecord*>> by_proposer(n);
  for (const auto& rec : lazy.proposal_log()) by_proposer[rec.proposer].push_back(&rec);

  // proposer-major views: pscore = proposer's score, rscore = receiver's score.
  std::vector<std::uint8_t> adm(n * n, 0);
  std::vector<double> pscore(n * n, 0.0);
  std::vector<double> rscore(n * n, -1.0);

  std::vector<std::uint32_t> ident(n);
  std::vector<std::uint8_t> used(n);
  std::vector<std::uint32_t> pool;
  std::vector<double> sorted(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    if (by_proposer[a].size() != lazy.returned(a))
      throw std::logic_error("materialize: receivers returned outside the proposal run");
    std::fill(ident.begin(), ident.end(), kUnset);
    std::fill(used.begin(), used.end(), 0);
    for (const auto* rec : by_proposer[a]) {
      ident[rec->position] = rec->receiver;
      used[rec->receiver] = 1;
      adm[a * n + rec->receiver] = 1;
      rscore[a * n + rec->receiver] = rec->score;
    }
    pool.clear();
    for (std::uint32_t r = 0; r < n; ++r)
      if (!used[r]) pool.push_back(r);
    // Uniform shuffle of the unreturned receivers; skipped positions take the
    // first ones, the tail of the permutation takes the rest.
    for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
    // Coins logged admissible after the run cannot sit in a skipped block.
    std::stable_partition(pool.begin(), pool.end(),
                          [&](std::uint32_t r) { return lazy.logged_coin(a, r) != std::optional<bool>(true); });
    std::size_t next = 0;
    const std::size_t consumed = lazy.positions_used(a);
    for (std::size_t k = 0; k < n; ++k) {
      if (ident[k] != kUnset) continue;
      const std::uint32_t r = pool[next++];
      ident[k] = r;
      if (k >= consumed) {
        if (auto logged = lazy.logged_coin(a, r))
          adm[a * n + r] = *logged ? 1 : 0;
        else
          adm[a * n + r] = policy == CoinPolicy::admissible ? 1 : (rng.bernoulli(lazy.p()) ? 1 : 0);
      }
    }
    for (auto& v : sorted) v = rng.uniform();
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < n; ++k) pscore[a * n + ident[k]] = sorted[k];
  }
  for (auto& v : rscore)
    if (v < 0.0) v = rng.uniform();

  if (lazy.proposers() == Side::men)
    return DenseInstance(n, lazy.p(), std::move(adm), std::move(pscore), std::move(rscore));

  // Women proposed: transpose into man-major storage.
  std::vector<std::uint8_t> adm_t(n * n);
  std::vector<double> x(n * n), y(n * n);
  for (std::size_t w = 0; w < n; ++w)
    for (std::size_t m = 0; m < n; ++m) {
      adm_t[m * n + w] = adm[w * n + m];
      y[m * n + w] = pscore[w * n + m];
      x[m * n + w] = rscore[w * n + m];
    }
  return DenseInstance(n, lazy.p(), std::move(adm_t), std::move(x), std::move(y));
}

}  // namespace csm
