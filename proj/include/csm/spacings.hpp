#pragma once

// Uniform spacings of [0, 1]: the l gaps cut by l - 1 independent uniform
// points, sampled as normalized unit exponentials.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "csm/rng.hpp"
#include "csm/stats.hpp"

namespace csm {

struct SpacingsSample {
  std::vector<double> L;
  double Lmax = 0.0;
  double U = 0.0;  // sum of squares
};

SpacingsSample sample_spacings(std::size_t l, Stream& rng);

/// P(Lmax <= x) = sum_k (-1)^k C(l, k) (1 - k x)_+^(l-1). The alternating
/// sum is evaluated in MPFR with enough working precision to absorb the
/// cancellation, so the result is correct to double precision for any l.
double max_spacing_cdf(std::size_t l, double x);

/// Density of a sum of l independent uniforms:
/// (1/(l-1)!) sum_k (-1)^k C(l, k) (s - k)_+^(l-1).
double irwin_hall_density(std::size_t l, double s);

/// s^(l-1)/(l-1)!: the density bound obtained by dropping the max-spacing
/// restriction.
double unrestricted_density(std::size_t l, double s);

/// Monte Carlo density of the uniform sum through spacings:
/// s^(l-1)/(l-1)! * P(Lmax <= 1/s). Block b of kReductionBlock samples reads
/// stream spec.child(b). When the event is rare (s close to l) the spacings
/// come from a concentrated symmetric Dirichlet law with importance weights;
/// the estimate stays unbiased and se is the weighted-sample standard error.
MCEstimate spacing_density_mc(std::size_t l, double s, std::uint64_t samples, StreamSpec spec,
                              unsigned threads = 1);

struct MaxSpacingReport {
  double lower_threshold = 0.0;  // (log(l / log l) - rho) / l
  double upper_threshold = 0.0;  // log(l * omega) / l, omega = log l
  double exact_below_lower = 0.0;
  double exact_below_upper = 0.0;
  double fraction_below_lower = 0.0;
  double fraction_below_upper = 0.0;
  MCEstimate scaled_U;  // l U / 2
  double fraction_U_deviating = 0.0;  // |l U / 2 - 1| >= l^(-delta)
  std::uint64_t trials = 0;
};

/// Empirical check of the max-spacing and sum-of-squares concentration
/// statements at a single l. Trial t reads stream spec.child(t).
/// Requires l >= 10, trials >= 100, rho > 0, 0 < delta < 1/3.
MaxSpacingReport lemma2_check(std::size_t l, std::uint64_t trials, double rho, double delta, StreamSpec spec,
                              unsigned threads = 1);

}  // namespace csm
