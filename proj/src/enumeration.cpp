#include "csm/enumeration.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "csm/lazy_instance.hpp"
#include "csm/parallel.hpp"

namespace csm {

namespace {

class Search {
 public:
  explicit Search(const DenseInstance& inst)
      : inst_(inst), n_(inst.n()), wife_(n_, -1), husband_(n_, -1) {}

  StableSet run() {
    descend(0);
    return std::move(out_);
  }

 private:
  bool prefers_man_side(std::size_t man, std::size_t woman) const {
    const std::int32_t w = wife_[man];
    return w < 0 || inst_.man_score(man, woman) < inst_.man_score(man, static_cast<std::size_t>(w));
  }

  bool prefers_woman_side(std::size_t man, std::size_t woman) const {
    const std::int32_t h = husband_[woman];
    return h < 0 || inst_.woman_score(man, woman) < inst_.woman_score(static_cast<std::size_t>(h), woman);
  }

  // Blocking pairs that became final once man i was decided.
  bool consistent(std::size_t i) const {
    const std::int32_t own = wife_[i];
    for (std::size_t w = 0; w < n_; ++w) {
      const std::int32_t h = husband_[w];
      if (h < 0 || static_cast<std::size_t>(h) == i) continue;
      if (inst_.admissible(i, w) && prefers_man_side(i, w) && prefers_woman_side(i, w)) return false;
    }
    if (own >= 0) {
      const auto w = static_cast<std::size_t>(own);
      for (std::size_t m = 0; m < i; ++m)
        if (inst_.admissible(m, w) && prefers_man_side(m, w) && prefers_woman_side(m, w)) return false;
    }
    return true;
  }

  void descend(std::size_t i) {
    if (i == n_) {
      leaf();
      return;
    }
    if (consistent(i)) descend(i + 1);
    for (std::size_t w = 0; w < n_; ++w) {
      if (husband_[w] >= 0 || !inst_.admissible(i, w)) continue;
      wife_[i] = static_cast<std::int32_t>(w);
      husband_[w] = static_cast<std::int32_t>(i);
      if (consistent(i)) descend(i + 1);
      husband_[w] = -1;
      wife_[i] = -1;
    }
  }

  void leaf() {
    Matching m(n_);
    for (std::size_t i = 0; i < n_; ++i)
      if (wife_[i] >= 0) m.add(i, static_cast<std::size_t>(wife_[i]));
    if (!verify_stable(inst_, m).stable()) return;
    const RankTotals r = total_ranks(inst_, m);
    if (out_.stable_matchings.empty()) {
      out_.matched_men = m.matched_men();
      out_.matched_women = m.matched_women();
      out_.Q_minus = out_.Q_plus = r.wife_ranks;
      out_.R_minus = out_.R_plus = r.husband_ranks;
    } else {
      if (m.matched_men() != out_.matched_men || m.matched_women() != out_.matched_women)
        out_.matched_sets_agree = false;
      out_.Q_minus = std::min(out_.Q_minus, r.wife_ranks);
      out_.Q_plus = std::max(out_.Q_plus, r.wife_ranks);
      out_.R_minus = std::min(out_.R_minus, r.husband_ranks);
      out_.R_plus = std::max(out_.R_plus, r.husband_ranks);
    }
    if (m.complete()) ++out_.complete_count;
    out_.ranks.push_back(r);
    out_.stable_matchings.push_back(std::move(m));
  }

  const DenseInstance& inst_;
  std::size_t n_;
  std::vector<std::int32_t> wife_;
  std::vector<std::int32_t> husband_;
  StableSet out_;
};

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap)
    throw std::invalid_argument("enumeration: n = " + std::to_string(n) + " exceeds the cap of " +
                                std::to_string(cap));
}

void check_trials(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("empirical estimate: trials must be positive");
}

}  // namespace

StableSet enumerate_stable(const DenseInstance& inst, std::size_t cap) {
  check_cap(inst.n(), cap);
  return Search(inst).run();
}

const char* to_string(Statistic s) {
  switch (s) {
    case Statistic::S_complete: return "S_complete";
    case Statistic::matched_size: return "matched_size";
    case Statistic::Q_minus: return "Q_minus";
    case Statistic::Q_plus: return "Q_plus";
    case Statistic::exists_complete: return "exists_complete";
  }
  return "?";
}

const char* to_string(Mode m) { return m == Mode::dense ? "dense" : "lazy"; }

MCEstimate empirical_expectation(std::size_t n, double p, std::uint64_t trials, StreamSpec spec,
                                 Statistic statistic, unsigned threads, std::size_t cap) {
  check_trials(trials);
  if (statistic != Statistic::matched_size) check_cap(n, cap);
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    const DenseInstance inst = generate_dense(n, p, spec.child(t));
    if (statistic == Statistic::matched_size) {
      values[t] = static_cast<double>(propose(inst, Side::men).size);
      return;
    }
    const StableSet set = enumerate_stable(inst, cap);
    switch (statistic) {
      case Statistic::S_complete: values[t] = static_cast<double>(set.complete_count); break;
      case Statistic::exists_complete: values[t] = set.complete_count > 0 ? 1.0 : 0.0; break;
      case Statistic::Q_minus: values[t] = static_cast<double>(set.Q_minus); break;
      case Statistic::Q_plus: values[t] = static_cast<double>(set.Q_plus); break;
      case Statistic::matched_size: break;
    }
  });
  return summarize(values);
}

std::vector<MCEstimate> empirical_rank_counts(std::size_t n, double p, std::uint64_t trials, StreamSpec spec,
                                              unsigned threads, std::size_t cap) {
  check_trials(trials);
  check_cap(n, cap);
  const std::size_t width = n * n + 1;
  std::vector<double> counts(trials * width, 0.0);
  parallel_for(trials, threads, [&](std::size_t t) {
    const StableSet set = enumerate_stable(generate_dense(n, p, spec.child(t)), cap);
    for (std::size_t s = 0; s < set.stable_matchings.size(); ++s)
      if (set.stable_matchings[s].complete()) counts[t * width + set.ranks[s].wife_ranks] += 1.0;
  });
  std::vector<MCEstimate> out(width);
  std::vector<double> column(trials);
  for (std::size_t k = 0; k < width; ++k) {
    for (std::size_t t = 0; t < trials; ++t) column[t] = counts[t * width + k];
    out[k] = summarize(column);
  }
  return out;
}

std::vector<MCEstimate> empirical_size_distribution(std::size_t n, double p, std::uint64_t trials,
                                                    StreamSpec spec, Mode mode, unsigned threads) {
  check_trials(trials);
  std::vector<std::size_t> sizes(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    if (mode == Mode::dense) {
      sizes[t] = propose(generate_dense(n, p, spec.child(t)), Side::men).size;
    } else {
      LazyInstance lazy(n, p, spec.child(t), Side::men);
      sizes[t] = propose(lazy, Side::men).size;
    }
  });
  std::vector<MCEstimate> out(n + 1);
  std::vector<double> indicator(trials);
  for (std::size_t l = 0; l <= n; ++l) {
    for (std::size_t t = 0; t < trials; ++t) indicator[t] = sizes[t] == l ? 1.0 : 0.0;
    out[l] = summarize(indicator);
  }
  return out;
}

}  // namespace csm
