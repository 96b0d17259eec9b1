#include "csm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "csm/parallel.hpp"

namespace csm {

namespace {

constexpr std::size_t kMaxRankN = 8;

double binomial(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

double factorial(std::size_t n) {
  double out = 1.0;
  for (std::size_t i = 2; i <= n; ++i) out *= static_cast<double>(i);
  return out;
}

void check_common(std::size_t n, double p, std::uint64_t samples) {
  if (n == 0) throw std::invalid_argument("analytic: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("analytic: p must lie in [0, 1]");
  if (samples < 2) throw std::invalid_argument("analytic: need at least 2 samples");
}

// Draws `samples` points (x, y) in [0,1]^dim x [0,1]^dim and feeds each to
// body(x, y, out), which writes `width` values. Returns one RunningStats per
// output, reduced deterministically over blocks.
template <typename Body>
std::vector<RunningStats> sample_integrand(std::size_t dim, std::size_t width, std::uint64_t samples,
                                           StreamSpec spec, unsigned threads, Body&& body) {
  const std::size_t blocks = static_cast<std::size_t>((samples + kReductionBlock - 1) / kReductionBlock);
  std::vector<RunningStats> partial(blocks * width);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Stream rng(spec.child(b));
    std::vector<double> x(dim), y(dim), out(width);
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kReductionBlock;
    const std::uint64_t end = std::min<std::uint64_t>(samples, begin + kReductionBlock);
    for (std::uint64_t s = begin; s < end; ++s) {
      for (auto& v : x) v = rng.uniform();
      for (auto& v : y) v = rng.uniform();
      body(std::span<const double>(x), std::span<const double>(y), out);
      for (std::size_t w = 0; w < width; ++w) partial[b * width + w].add(out[w]);
    }
  });
  std::vector<RunningStats> result(width);
  std::vector<RunningStats> column(blocks);
  for (std::size_t w = 0; w < width; ++w) {
    for (std::size_t b = 0; b < blocks; ++b) column[b] = partial[b * width + w];
    result[w] = reduce_pairwise(column);
  }
  return result;
}

// (prod_i (1 - p x_i) prod_j (1 - p y_j))^power
double unmatched_factor(std::span<const double> x, std::span<const double> y, double p, std::size_t power) {
  if (power == 0) return 1.0;
  double base = 1.0;
  for (double v : x) base *= 1.0 - p * v;
  for (double v : y) base *= 1.0 - p * v;
  return std::pow(base, static_cast<double>(power));
}

}  // namespace

double RankPolynomial::evaluate(double xi) const {
  if (xi == 1.0) {
    CompensatedSum sum;
    for (double c : coeffs) sum.add(c);
    return sum.value();
  }
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * xi + *it;
  return acc;
}

RankPolynomial rank_integrand(std::span<const double> x, std::span<const double> y, double p) {
  if (x.size() != y.size()) throw std::invalid_argument("rank_integrand: x and y differ in length");
  const std::size_t n = x.size();
  RankPolynomial poly;
  poly.coeffs.reserve(n * (n - (n ? 1 : 0)) + 1);
  poly.coeffs.push_back(1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 1.0 - p * x[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double b = p * x[i] * (1.0 - y[j]);
      poly.coeffs.push_back(0.0);
      for (std::size_t d = poly.coeffs.size() - 1; d > 0; --d)
        poly.coeffs[d] = a * poly.coeffs[d] + b * poly.coeffs[d - 1];
      poly.coeffs[0] *= a;
    }
  }
  return poly;
}

double stable_integrand(std::span<const double> x, std::span<const double> y, double p) {
  double prod = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (i != j) prod *= 1.0 - p * x[i] * y[j];
  return prod;
}

MCEstimate mc_Pn(std::size_t n, double p, std::uint64_t samples, StreamSpec spec, unsigned threads) {
  check_common(n, p, samples);
  const double scale = std::pow(p, static_cast<double>(n));
  auto stats = sample_integrand(n, 1, samples, spec, threads, [&](auto x, auto y, std::vector<double>& out) {
    out[0] = scale * stable_integrand(x, y, p);
  });
  return stats[0].estimate();
}

MCEstimate mc_expected_stable(std::size_t n, double p, std::uint64_t samples, StreamSpec spec,
                              unsigned threads) {
  return mc_Pn(n, p, samples, spec, threads).scaled(factorial(n));
}

RankProbabilities mc_rank_probabilities(std::size_t n, double p, std::uint64_t samples, StreamSpec spec,
                                        unsigned threads) {
  check_common(n, p, samples);
  if (n > kMaxRankN) throw std::invalid_argument("mc_rank_probabilities: n must be at most 8");
  const double scale = std::pow(p, static_cast<double>(n));
  const std::size_t terms = n * (n - 1) + 1;
  // Slot 0 carries the plain product so that `total` matches mc_Pn exactly.
  auto stats = sample_integrand(n, terms + 1, samples, spec, threads, [&](auto x, auto y, std::vector<double>& out) {
    out[0] = scale * stable_integrand(x, y, p);
    const RankPolynomial poly = rank_integrand(x, y, p);
    for (std::size_t d = 0; d < terms; ++d) out[d + 1] = scale * poly.coeffs[d];
  });
  RankProbabilities result;
  result.total = stats[0].estimate();
  result.first_k = n;
  for (std::size_t d = 0; d < terms; ++d) result.by_k.push_back(stats[d + 1].estimate());
  return result;
}

MCEstimate mc_Pnk(std::size_t n, double p, std::size_t k, std::uint64_t samples, StreamSpec spec,
                  unsigned threads) {
  if (k < n || k > n * n)
    throw std::invalid_argument("mc_Pnk: k = " + std::to_string(k) + " outside [n, n^2]");
  return mc_rank_probabilities(n, p, samples, spec, threads).by_k[k - n];
}

MCEstimate mc_Pnk_partial(std::size_t n, std::size_t l, double p, std::size_t k, std::uint64_t samples,
                          StreamSpec spec, unsigned threads) {
  check_common(n, p, samples);
  if (l > n) throw std::invalid_argument("mc_Pnk_partial: l exceeds n");
  const double outside = std::pow(1.0 - p, static_cast<double>((n - l) * (n - l)));
  if (l == 0) {
    if (k != 0) throw std::invalid_argument("mc_Pnk_partial: k must be 0 when l = 0");
    return {outside, 0.0, samples};
  }
  if (l > kMaxRankN) throw std::invalid_argument("mc_Pnk_partial: l must be at most 8");
  if (k < l || k > l * l)
    throw std::invalid_argument("mc_Pnk_partial: k = " + std::to_string(k) + " outside [l, l^2]");
  const double scale = std::pow(p, static_cast<double>(l)) * outside;
  auto stats = sample_integrand(l, 1, samples, spec, threads, [&](auto x, auto y, std::vector<double>& out) {
    const RankPolynomial poly = rank_integrand(x, y, p);
    out[0] = scale * poly.coeffs[k - l] * unmatched_factor(x, y, p, n - l);
  });
  return stats[0].estimate();
}

PartialBound partial_bound(std::size_t n, std::size_t l, double p, std::uint64_t samples, StreamSpec spec,
                           unsigned threads) {
  check_common(n, p, samples);
  if (l > n) throw std::invalid_argument("partial_bound: l exceeds n");
  const double outside = std::pow(1.0 - p, static_cast<double>((n - l) * (n - l)));
  if (l == 0) return {{outside, 0.0, samples}, {outside, 0.0, samples}};
  const double choose = binomial(n, l);
  const double scale = choose * choose * factorial(l) * std::pow(p, static_cast<double>(l)) * outside;
  auto stats = sample_integrand(l, 2, samples, spec, threads, [&](auto x, auto y, std::vector<double>& out) {
    const double core = scale * stable_integrand(x, y, p);
    out[0] = core * unmatched_factor(x, y, p, n - l);
    out[1] = core;
  });
  return {stats[0].estimate(), stats[1].estimate()};
}

const char* to_string(Reference r) {
  switch (r) {
    case Reference::p_threshold: return "p_threshold";
    case Reference::harmonic_bound: return "harmonic_bound";
    case Reference::knuth_asymptotic: return "knuth_asymptotic";
    case Reference::delta_n: return "delta_n";
    case Reference::rank_scale: return "rank_scale";
  }
  return "?";
}

double reference_value(std::size_t n, Reference which, double param) {
  if (n < 2) throw std::invalid_argument("reference_value: n must be at least 2");
  const double nd = static_cast<double>(n);
  const double ln = std::log(nd);
  switch (which) {
    case Reference::p_threshold:
      return ln * ln / nd;
    case Reference::harmonic_bound: {
      CompensatedSum h;
      for (std::size_t i = n; i >= 1; --i) h.add(1.0 / static_cast<double>(i));
      return nd * h.value();
    }
    case Reference::knuth_asymptotic:
      return nd * ln / std::numbers::e;
    case Reference::delta_n:
      if (!(param > 0.0 && param < 1.0)) throw std::invalid_argument("reference_value: delta_n needs c in (0, 1)");
      return std::pow(nd, 1.0 - std::sqrt(param)) / (ln * ln);
    case Reference::rank_scale:
      if (!(param >= 0.0 && param <= 1.0)) throw std::invalid_argument("reference_value: rank_scale needs p in [0, 1]");
      return std::sqrt(param * nd * nd * nd);
  }
  throw std::invalid_argument("reference_value: unknown reference");
}

}  // namespace csm
