#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "csm/enumeration.hpp"

using namespace csm;

namespace {

std::string fixture(const char* name) { return std::string(CSM_FIXTURE_DIR) + "/" + name; }

// Every injective partial map, checked one by one.
std::size_t naive_stable_count(const DenseInstance& inst) {
  const std::size_t n = inst.n();
  std::size_t count = 0;
  std::vector<int> wife(n, -1);
  std::vector<bool> taken(n, false);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      Matching m(n);
      for (std::size_t a = 0; a < n; ++a)
        if (wife[a] >= 0) m.add(a, static_cast<std::size_t>(wife[a]));
      if (verify_stable(inst, m).stable()) ++count;
      return;
    }
    self(self, i + 1);
    for (std::size_t w = 0; w < n; ++w) {
      if (taken[w]) continue;
      taken[w] = true;
      wife[i] = static_cast<int>(w);
      self(self, i + 1);
      wife[i] = -1;
      taken[w] = false;
    }
  };
  rec(rec, 0);
  return count;
}

bool within(const MCEstimate& e, double target, double k = 3.0) { return std::abs(e.mean - target) <= k * e.se; }

}  // namespace

TEST_CASE("classic 2x2") {
  const auto set = enumerate_stable(load_instance(fixture("classic_2x2.txt")));
  CHECK(set.stable_matchings.size() == 2);
  CHECK(set.complete_count == 2);
  CHECK(set.Q_minus == 2);
  CHECK(set.Q_plus == 4);
  CHECK(set.R_minus == 2);
  CHECK(set.R_plus == 4);
  CHECK(set.matched_sets_agree);
}

TEST_CASE("p = 0 has only the empty matching") {
  for (std::size_t n = 1; n <= 5; ++n) {
    const auto set = enumerate_stable(generate_dense(n, 0.0, {1, n}));
    REQUIRE(set.stable_matchings.size() == 1);
    CHECK(set.stable_matchings[0].size() == 0);
    CHECK(set.complete_count == 0);
  }
}

TEST_CASE("cyclic 3x3 has three complete stable matchings") {
  const auto set = enumerate_stable(load_instance(fixture("cyclic_3x3.txt")));
  CHECK(set.stable_matchings.size() == 3);
  CHECK(set.complete_count == 3);
  for (const auto& m : set.stable_matchings) CHECK(m.complete());
}

TEST_CASE("cap is enforced") {
  CHECK_THROWS_AS(enumerate_stable(generate_dense(8, 0.5, {1, 1})), std::invalid_argument);
  CHECK_NOTHROW(enumerate_stable(generate_dense(8, 0.5, {1, 1}), 8));
  CHECK_THROWS_AS(enumerate_stable(generate_dense(3, 0.5, {1, 1}), 2), std::invalid_argument);
}

TEST_CASE("pruned search agrees with the exhaustive check") {
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + t % 5;
    const double p = (t % 4 + 1) * 0.25;
    const auto inst = generate_dense(n, p, {314, static_cast<std::uint64_t>(t)});
    const auto set = enumerate_stable(inst);
    REQUIRE(set.stable_matchings.size() == naive_stable_count(inst));
    for (const auto& m : set.stable_matchings) CHECK(verify_stable(inst, m).stable());
  }
}

TEST_CASE("propose outcomes are the extremal stable matchings") {
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + t % 6;
    const double p = std::array{0.3, 0.7, 1.0}[t % 3];
    const auto inst = generate_dense(n, p, {2718, static_cast<std::uint64_t>(t)});
    const auto set = enumerate_stable(inst);
    REQUIRE(set.matched_sets_agree);
    const auto men = propose(inst, Side::men);
    const auto women = propose(inst, Side::women);
    auto listed = [&](const Matching& m) {
      return std::find(set.stable_matchings.begin(), set.stable_matchings.end(), m) != set.stable_matchings.end();
    };
    CHECK(listed(men.matching));
    CHECK(listed(women.matching));
    CHECK(men.wife_rank_total == set.Q_minus);
    CHECK(women.wife_rank_total == set.Q_plus);
    CHECK(women.husband_rank_total == set.R_minus);
    CHECK(men.husband_rank_total == set.R_plus);
    for (const auto& m : set.stable_matchings)
      for (std::size_t man : m.matched_men())
        CHECK(partner_rank(inst, men.matching, man, Side::men) <= partner_rank(inst, m, man, Side::men));
  }
}

TEST_CASE("expected number of complete stable matchings, n = 2, p = 1") {
  const auto e = empirical_expectation(2, 1.0, 100000, {1, 0}, Statistic::S_complete);
  CHECK(e.count == 100000);
  CHECK(within(e, 1.125));
}

TEST_CASE("matched size for n = 1 is a coin") {
  CHECK(within(empirical_expectation(1, 0.5, 100000, {2, 0}, Statistic::matched_size), 0.5));
}

TEST_CASE("expected number of complete stable matchings, n = 2, p = 1/2") {
  // 2 p^2 (1 - p/4)^2
  CHECK(within(empirical_expectation(2, 0.5, 100000, {3, 0}, Statistic::S_complete), 0.3828125));
}

TEST_CASE("exists_complete and extremal ranks are consistent") {
  const auto exists = empirical_expectation(3, 1.0, 2000, {4, 0}, Statistic::exists_complete);
  CHECK(exists.mean == 1.0);
  const auto qm = empirical_expectation(4, 0.8, 2000, {5, 0}, Statistic::Q_minus);
  const auto qp = empirical_expectation(4, 0.8, 2000, {5, 0}, Statistic::Q_plus);
  CHECK(qm.mean <= qp.mean);
  CHECK_THROWS_AS(empirical_expectation(9, 0.5, 10, {1, 1}, Statistic::S_complete), std::invalid_argument);
  CHECK_NOTHROW(empirical_expectation(9, 0.5, 10, {1, 1}, Statistic::matched_size));
  CHECK_THROWS_AS(empirical_expectation(2, 0.5, 0, {1, 1}, Statistic::matched_size), std::invalid_argument);
}

TEST_CASE("worker count does not change results") {
  const auto a = empirical_expectation(4, 0.6, 5000, {6, 0}, Statistic::S_complete, 1);
  const auto b = empirical_expectation(4, 0.6, 5000, {6, 0}, Statistic::S_complete, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
  const auto ra = empirical_rank_counts(3, 0.7, 3000, {7, 0}, 1);
  const auto rb = empirical_rank_counts(3, 0.7, 3000, {7, 0}, 4);
  for (std::size_t k = 0; k < ra.size(); ++k) CHECK(ra[k].mean == rb[k].mean);
}

TEST_CASE("rank counts add up to the complete count") {
  const auto counts = empirical_rank_counts(3, 0.7, 20000, {8, 0});
  const auto total = empirical_expectation(3, 0.7, 20000, {8, 0}, Statistic::S_complete);
  double sum = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k < 3) CHECK(counts[k].mean == 0.0);
    sum += counts[k].mean;
  }
  CHECK(sum == doctest::Approx(total.mean).epsilon(1e-12));
}

TEST_CASE("size distribution sums to one") {
  const auto dist = empirical_size_distribution(5, 0.5, 10000, {9, 0}, Mode::dense);
  double sum = 0.0;
  for (const auto& e : dist) sum += e.mean;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}
