#include "csm/spacings.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "csm/parallel.hpp"

namespace csm {

namespace {

// RAII wrapper around one mpfr_t.
class Real {
 public:
  explicit Real(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Real() { mpfr_clear(v_); }
  Real(const Real&) = delete;
  Real& operator=(const Real&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

// sum_{k=0}^{last} (-1)^k C(l, k) base(k)^(l-1), with base(k) > 0.
// `approx(k)` is base(k) in double precision. Terms can exceed the result by
// hundreds of orders of magnitude, so the working precision is sized from the
// largest term.
template <typename Approx, typename Base>
double alternating_sum(std::size_t l, std::size_t last, Approx&& approx, Base&& base) {
  const double lf = static_cast<double>(l);
  double log_max = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const double kd = static_cast<double>(k);
    const double log_binom = std::lgamma(lf + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(lf - kd + 1.0);
    const double b = std::max(approx(k), 1e-300);
    log_max = std::max(log_max, log_binom + (lf - 1.0) * std::log(b));
  }
  const auto prec = static_cast<mpfr_prec_t>(128 + std::ceil(log_max / std::log(2.0)));

  Real sum(prec), binom(prec), term(prec), b(prec);
  mpfr_set_ui(sum.get(), 0, MPFR_RNDN);
  mpfr_set_ui(binom.get(), 1, MPFR_RNDN);
  for (std::size_t k = 0; k <= last; ++k) {
    if (k > 0) {
      mpfr_mul_ui(binom.get(), binom.get(), static_cast<unsigned long>(l - k + 1), MPFR_RNDN);
      mpfr_div_ui(binom.get(), binom.get(), static_cast<unsigned long>(k), MPFR_RNDN);
    }
    base(b.get(), k);
    mpfr_pow_ui(term.get(), b.get(), static_cast<unsigned long>(l - 1), MPFR_RNDN);
    mpfr_mul(term.get(), term.get(), binom.get(), MPFR_RNDN);
    if (k % 2 == 0)
      mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    else
      mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
  }
  return mpfr_get_d(sum.get(), MPFR_RNDN);
}

}  // namespace

SpacingsSample sample_spacings(std::size_t l, Stream& rng) {
  if (l == 0) throw std::invalid_argument("sample_spacings: l must be positive");
  SpacingsSample s;
  s.L.resize(l);
  CompensatedSum total;
  for (auto& v : s.L) {
    v = rng.exponential();
    total.add(v);
  }
  const double t = total.value();
  CompensatedSum squares;
  for (auto& v : s.L) {
    v /= t;
    s.Lmax = std::max(s.Lmax, v);
    squares.add(v * v);
  }
  s.U = squares.value();
  return s;
}

double max_spacing_cdf(std::size_t l, double x) {
  if (l == 0) throw std::invalid_argument("max_spacing_cdf: l must be positive");
  if (x >= 1.0) return 1.0;
  if (x * static_cast<double>(l) < 1.0) return 0.0;
  // Largest k with 1 - k x > 0.
  auto last = static_cast<std::size_t>(std::floor(1.0 / x));
  while (last > 0 && 1.0 - static_cast<double>(last) * x <= 0.0) --last;
  last = std::min(last, l);
  const double value = alternating_sum(
      l, last, [&](std::size_t k) { return 1.0 - static_cast<double>(k) * x; },
      [&](mpfr_ptr out, std::size_t k) {
    mpfr_set_d(out, x, MPFR_RNDN);
    mpfr_mul_ui(out, out, static_cast<unsigned long>(k), MPFR_RNDN);
    mpfr_ui_sub(out, 1, out, MPFR_RNDN);
  });
  return std::clamp(value, 0.0, 1.0);
}

double irwin_hall_density(std::size_t l, double s) {
  if (l == 0) throw std::invalid_argument("irwin_hall_density: l must be positive");
  if (s <= 0.0 || s >= static_cast<double>(l)) return 0.0;
  std::size_t last = static_cast<std::size_t>(std::floor(s));
  if (static_cast<double>(last) == s && last > 0) --last;  // (s - k)_+ vanishes at k = s
  double value = alternating_sum(
      l, last, [&](std::size_t k) { return s - static_cast<double>(k); },
      [&](mpfr_ptr out, std::size_t k) {
    mpfr_set_d(out, s, MPFR_RNDN);
    mpfr_sub_ui(out, out, static_cast<unsigned long>(k), MPFR_RNDN);
  });
  value /= std::tgamma(static_cast<double>(l));
  return std::max(value, 0.0);
}

double unrestricted_density(std::size_t l, double s) {
  if (l == 0) throw std::invalid_argument("unrestricted_density: l must be positive");
  return std::pow(s, static_cast<double>(l - 1)) / std::tgamma(static_cast<double>(l));
}

MCEstimate spacing_density_mc(std::size_t l, double s, std::uint64_t samples, StreamSpec spec,
                              unsigned threads) {
  if (samples < 2) throw std::invalid_argument("spacing_density_mc: need at least 2 samples");
  if (!(s > 0.0)) throw std::invalid_argument("spacing_density_mc: s must be positive");
  const double cut = 1.0 / s;
  const double scale = unrestricted_density(l, s);
  const double ld = static_cast<double>(l);

  // As s approaches l the event needs every spacing within cut - 1/l of 1/l,
  // which plain sampling almost never sees. Then sample a symmetric
  // Dirichlet(alpha) whose spacings spread about that far and reweight by the
  // density ratio to the uniform (alpha = 1) law.
  const double gap = cut - 1.0 / ld;
  double alpha = 1.0;
  if (l > 1 && gap > 0.0) alpha = std::max(1.0, ((ld - 1.0) / (ld * ld * gap * gap) - 1.0) / ld);
  const double log_norm = std::lgamma(ld) + ld * std::lgamma(alpha) - std::lgamma(ld * alpha);

  const std::size_t blocks = static_cast<std::size_t>((samples + kReductionBlock - 1) / kReductionBlock);
  std::vector<RunningStats> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Stream rng(spec.child(b));
    std::gamma_distribution<double> gamma(alpha);
    std::vector<double> w(l);
    const std::uint64_t begin = static_cast<std::uint64_t>(b) * kReductionBlock;
    const std::uint64_t end = std::min<std::uint64_t>(samples, begin + kReductionBlock);
    for (std::uint64_t i = begin; i < end; ++i) {
      if (alpha == 1.0) {
        partial[b].add(sample_spacings(l, rng).Lmax <= cut ? scale : 0.0);
        continue;
      }
      double total = 0.0;
      for (auto& v : w) total += v = gamma(rng);
      double lmax = 0.0, log_prod = 0.0;
      for (double v : w) {
        lmax = std::max(lmax, v / total);
        log_prod += std::log(v / total);
      }
      partial[b].add(lmax <= cut ? scale * std::exp(log_norm + (1.0 - alpha) * log_prod) : 0.0);
    }
  });
  return reduce_pairwise(partial).estimate();
}

MaxSpacingReport lemma2_check(std::size_t l, std::uint64_t trials, double rho, double delta, StreamSpec spec,
                              unsigned threads) {
  if (l < 10) throw std::invalid_argument("lemma2_check: l must be at least 10");
  if (trials < 100) throw std::invalid_argument("lemma2_check: need at least 100 trials");
  if (!(rho > 0.0)) throw std::invalid_argument("lemma2_check: rho must be positive");
  if (!(delta > 0.0 && delta < 1.0 / 3.0)) throw std::invalid_argument("lemma2_check: delta must lie in (0, 1/3)");

  const double ld = static_cast<double>(l);
  const double log_l = std::log(ld);
  MaxSpacingReport r;
  r.trials = trials;
  r.lower_threshold = (std::log(ld / log_l) - rho) / ld;
  r.upper_threshold = std::log(ld * log_l) / ld;
  r.exact_below_lower = max_spacing_cdf(l, r.lower_threshold);
  r.exact_below_upper = max_spacing_cdf(l, r.upper_threshold);

  const double band = std::pow(ld, -delta);
  std::vector<double> lmax(trials), scaled_u(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    Stream rng(spec.child(t));
    const SpacingsSample s = sample_spacings(l, rng);
    lmax[t] = s.Lmax;
    scaled_u[t] = ld * s.U / 2.0;
  });
  std::uint64_t below_lower = 0, below_upper = 0, deviating = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    below_lower += lmax[t] <= r.lower_threshold;
    below_upper += lmax[t] <= r.upper_threshold;
    deviating += std::abs(scaled_u[t] - 1.0) >= band;
  }
  const double td = static_cast<double>(trials);
  r.fraction_below_lower = static_cast<double>(below_lower) / td;
  r.fraction_below_upper = static_cast<double>(below_upper) / td;
  r.fraction_U_deviating = static_cast<double>(deviating) / td;
  r.scaled_U = summarize(scaled_u);
  return r;
}

}  // namespace csm
