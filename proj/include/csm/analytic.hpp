#pragma once

// Monte Carlo evaluation of the stability integrals.
//
// For the diagonal matching of n men and n women, with x_i the man's score of
// his wife and y_j the woman's score of her husband,
//
//   P_n = p^n E[ prod_{i != j} (1 - p x_i y_j) ],   E[S_n] = n! P_n,
//
// and the joint probability of stability with total wife-rank k is
//
//   P_{n,k} = p^n E[ [xi^(k-n)] prod_{i != j} (1 - p x_i (1 - xi + xi y_j)) ].
//
// All estimators draw x and y uniformly from the unit cube in blocks of
// kReductionBlock samples; block b reads stream spec.child(b). Estimators
// that take the same (n, samples, spec) therefore share their samples.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csm/rng.hpp"
#include "csm/stats.hpp"

namespace csm {

/// Coefficients in the formal variable xi; coeffs[d] multiplies xi^d.
struct RankPolynomial {
  std::vector<double> coeffs;

  double evaluate(double xi) const;
  std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

/// prod_{i != j} (1 - p x_i (1 - xi + xi y_j)), expanded exactly. Each factor
/// is (1 - p x_i) + xi * p x_i (1 - y_j), so every coefficient is >= 0.
RankPolynomial rank_integrand(std::span<const double> x, std::span<const double> y, double p);

/// prod_{i != j} (1 - p x_i y_j).
double stable_integrand(std::span<const double> x, std::span<const double> y, double p);

/// Estimate of P_n. Exact (se = 0) for n = 1.
MCEstimate mc_Pn(std::size_t n, double p, std::uint64_t samples, StreamSpec spec, unsigned threads = 1);

/// E[S_n] = n! P_n on the same samples.
MCEstimate mc_expected_stable(std::size_t n, double p, std::uint64_t samples, StreamSpec spec,
                              unsigned threads = 1);

struct RankProbabilities {
  MCEstimate total;               // P_n, identical to mc_Pn on the same arguments
  std::size_t first_k = 0;        // rank of by_k[0]
  std::vector<MCEstimate> by_k;   // k = first_k .. first_k + by_k.size() - 1
};

/// P_{n,k} for every k in [n, n^2] on shared samples. n <= 8.
RankProbabilities mc_rank_probabilities(std::size_t n, double p, std::uint64_t samples, StreamSpec spec,
                                        unsigned threads = 1);

/// P_{n,k}; throws std::invalid_argument for k outside [n, n^2] or n > 8.
MCEstimate mc_Pnk(std::size_t n, double p, std::size_t k, std::uint64_t samples, StreamSpec spec,
                  unsigned threads = 1);

/// Partial-matching analogue: the diagonal matching of l men and l women
/// inside an n x n instance, with total wife-rank k:
///
///   p^l (1-p)^((n-l)^2) E[ [xi^(k-l)] prod_{i != j <= l} (...)
///                          * (prod_i (1 - p x_i) prod_j (1 - p y_j))^(n-l) ].
///
/// Requires 0 <= l <= n, l <= k <= l^2 (k = 0 when l = 0), l <= 8.
MCEstimate mc_Pnk_partial(std::size_t n, std::size_t l, double p, std::size_t k, std::uint64_t samples,
                          StreamSpec spec, unsigned threads = 1);

/// Upper bounds on the probability that the stable matched sets have size l.
/// `full` keeps the unmatched-side factors; `loose` drops them and equals
/// (1-p)^((n-l)^2) C(n,l)^2 E[S_l]. Both use the same samples, so
/// full <= loose holds sample by sample.
struct PartialBound {
  MCEstimate full;
  MCEstimate loose;
};

PartialBound partial_bound(std::size_t n, std::size_t l, double p, std::uint64_t samples, StreamSpec spec,
                           unsigned threads = 1);

enum class Reference { p_threshold, harmonic_bound, knuth_asymptotic, delta_n, rank_scale };

const char* to_string(Reference r);

/// p_threshold: ln^2 n / n.  harmonic_bound: n H_n.  knuth_asymptotic:
/// n ln n / e.  delta_n: n^(1 - sqrt(c)) / ln^2 n, c in (0, 1).
/// rank_scale: sqrt(p n^3), param = p in [0, 1].  Requires n >= 2.
double reference_value(std::size_t n, Reference which, double param = 0.0);

}  // namespace csm
