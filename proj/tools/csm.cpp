// csm: command-line front end for the constrained stable matching library.
//
//   csm simulate  --n 1000 --c 1 --mode lazy        one proposal run
//   csm enumerate --n 5 --p 0.5                     all stable matchings
//   csm estimate  --what Pn --n 3 --p 0.7           Monte Carlo integrals
//   csm spacings  --l 100000 --trials 200           max-spacing report
//   csm sweep     --config sweep.cfg                grid of (n, p) cells
//
// Exit status: 0 success, 2 configuration error, 1 runtime failure.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "csm/analytic.hpp"
#include "csm/enumeration.hpp"
#include "csm/experiments.hpp"
#include "csm/instance.hpp"
#include "csm/lazy_instance.hpp"
#include "csm/matching.hpp"
#include "csm/spacings.hpp"

namespace {

using csm::ConfigError;
using json = nlohmann::ordered_json;

struct ProbabilityArgs {
  std::optional<double> p;
  std::optional<double> c;

  void add_to(CLI::App& app) {
    app.add_option("--p", p, "admissibility probability");
    app.add_option("--c", c, "multiplier: p = min(1, c ln^2 n / n)");
  }

  double resolve(std::size_t n) const {
    if (p && c) throw ConfigError("give --p or --c, not both");
    if (!p && !c) throw ConfigError("one of --p or --c is required");
    if (p) {
      if (!(*p >= 0.0 && *p <= 1.0)) throw ConfigError("--p must lie in [0, 1]");
      return *p;
    }
    if (n < 2) throw ConfigError("--c needs n >= 2");
    if (!(*c >= 0.0)) throw ConfigError("--c must be non-negative");
    return csm::resolve_p(n, *c);
  }
};

csm::Mode parse_mode(const std::string& s) {
  if (s == "dense") return csm::Mode::dense;
  if (s == "lazy") return csm::Mode::lazy;
  throw ConfigError("--mode must be dense or lazy");
}

csm::Side parse_side(const std::string& s) {
  if (s == "men") return csm::Side::men;
  if (s == "women") return csm::Side::women;
  throw ConfigError("--side must be men or women");
}

json pairs_json(const csm::Matching& m) {
  json out = json::array();
  for (auto [a, b] : m.pairs()) out.push_back({a, b});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random stable matching with admissibility probability p"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run the proposal algorithm on one random instance");
  std::size_t sim_n = 0;
  ProbabilityArgs sim_prob;
  std::uint64_t sim_seed = 0;
  std::string sim_mode = "dense", sim_side = "men", sim_instance;
  bool sim_pairs = false;
  sim->add_option("--n", sim_n, "number of men (= women)");
  sim_prob.add_to(*sim);
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--mode", sim_mode, "dense|lazy");
  sim->add_option("--side", sim_side, "proposing side: men|women");
  sim->add_option("--instance", sim_instance, "read a dense instance from a fixture file");
  sim->add_flag("--pairs", sim_pairs, "include the matched pairs");

  // enumerate
  auto* en = app.add_subcommand("enumerate", "list all stable matchings of a small instance");
  std::size_t en_n = 0, en_cap = csm::kDefaultEnumerationCap;
  ProbabilityArgs en_prob;
  std::uint64_t en_seed = 0;
  std::string en_instance;
  bool en_pairs = false;
  en->add_option("--n", en_n, "number of men (= women)");
  en_prob.add_to(*en);
  en->add_option("--seed", en_seed, "master seed");
  en->add_option("--instance", en_instance, "read a dense instance from a fixture file");
  en->add_option("--cap", en_cap, "largest n accepted");
  en->add_flag("--pairs", en_pairs, "print every stable matching");

  // estimate
  auto* est = app.add_subcommand("estimate", "Monte Carlo integrals and reference values");
  std::string est_what = "Pn";
  std::size_t est_n = 2, est_k = 0, est_l = 0;
  ProbabilityArgs est_prob;
  std::uint64_t est_samples = 1000000, est_seed = 0;
  unsigned est_threads = 1;
  double est_param = 0.0;
  est->add_option("--what", est_what,
                  "Pn|ES|Pnk|ranks|partial|bound|p_threshold|harmonic_bound|knuth_asymptotic|delta_n|rank_scale");
  est->add_option("--n", est_n, "n");
  est_prob.add_to(*est);
  est->add_option("--k", est_k, "total wife-rank");
  est->add_option("--l", est_l, "matched-set size");
  est->add_option("--samples", est_samples, "Monte Carlo samples");
  est->add_option("--seed", est_seed, "master seed");
  est->add_option("--threads", est_threads, "worker threads (0 = all)");
  est->add_option("--param", est_param, "parameter of delta_n (c) or rank_scale (p)");

  // spacings
  auto* sp = app.add_subcommand("spacings", "max-spacing and sum-of-squares report");
  std::size_t sp_l = 100000;
  std::uint64_t sp_trials = 200, sp_seed = 0;
  double sp_rho = 1.0, sp_delta = 0.25;
  unsigned sp_threads = 1;
  sp->add_option("--l", sp_l, "number of spacings");
  sp->add_option("--trials", sp_trials, "samples");
  sp->add_option("--rho", sp_rho, "lower-threshold offset");
  sp->add_option("--delta", sp_delta, "deviation exponent");
  sp->add_option("--seed", sp_seed, "master seed");
  sp->add_option("--threads", sp_threads, "worker threads (0 = all)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a grid of (n, p) cells and emit one row per cell");
  std::string sw_config;
  std::map<std::string, std::string> sw_flags;
  sw->add_option("--config", sw_config, "flat key=value file; flags override it");
  for (const char* key : {"n", "p", "c", "trials", "seed", "mode", "statistics", "threads", "cap", "format", "out"})
    sw->add_option(std::string("--") + key, sw_flags[key], std::string("sweep setting '") + key + "'");
  bool sw_timing = false;
  sw->add_flag("--timing", sw_timing, "record wall time and peak memory (breaks byte-identical reruns)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) {
      const csm::Side side = parse_side(sim_side);
      json out;
      const auto start = std::chrono::steady_clock::now();
      csm::MatchOutcome result;
      std::size_t lazy_bytes = 0;
      if (!sim_instance.empty()) {
        const auto inst = csm::load_instance(sim_instance);
        result = csm::propose(inst, side);
        out["n"] = inst.n();
        out["p"] = inst.p();
        out["mode"] = "dense";
      } else {
        if (sim_n == 0) throw ConfigError("--n must be positive");
        const double p = sim_prob.resolve(sim_n);
        const csm::Mode mode = parse_mode(sim_mode);
        if (mode == csm::Mode::dense) {
          result = csm::propose(csm::generate_dense(sim_n, p, {sim_seed, 0}), side);
        } else {
          csm::LazyInstance lazy(sim_n, p, {sim_seed, 0}, side);
          result = csm::propose(lazy, side);
          lazy_bytes = lazy.approx_bytes();
        }
        out["n"] = sim_n;
        out["p"] = p;
        out["mode"] = csm::to_string(mode);
      }
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out["proposer_side"] = csm::to_string(side);
      out["size"] = result.size;
      out["proposals"] = result.proposals;
      out["Q"] = result.wife_rank_total;
      out["R"] = result.husband_rank_total;
      if (lazy_bytes) out["lazy_state_bytes"] = lazy_bytes;
      out["elapsed_s"] = elapsed;
      out["peak_rss_kb"] = csm::peak_rss_kb();
      if (sim_pairs) out["pairs"] = pairs_json(result.matching);
      std::cout << out.dump(2) << '\n';
    } else if (*en) {
      std::optional<csm::DenseInstance> inst;
      if (!en_instance.empty()) {
        inst = csm::load_instance(en_instance);
      } else {
        if (en_n == 0) throw ConfigError("--n must be positive");
        inst = csm::generate_dense(en_n, en_prob.resolve(en_n), {en_seed, 0});
      }
      if (inst->n() > en_cap) throw ConfigError("n exceeds --cap");
      const auto set = csm::enumerate_stable(*inst, en_cap);
      json out;
      out["n"] = inst->n();
      out["p"] = inst->p();
      out["stable_matchings"] = set.stable_matchings.size();
      out["S_complete"] = set.complete_count;
      out["T1"] = set.matched_men;
      out["T2"] = set.matched_women;
      out["matched_sets_agree"] = set.matched_sets_agree;
      out["Q_minus"] = set.Q_minus;
      out["Q_plus"] = set.Q_plus;
      out["R_minus"] = set.R_minus;
      out["R_plus"] = set.R_plus;
      if (en_pairs) {
        json all = json::array();
        for (std::size_t i = 0; i < set.stable_matchings.size(); ++i)
          all.push_back({{"pairs", pairs_json(set.stable_matchings[i])},
                         {"Q", set.ranks[i].wife_ranks},
                         {"R", set.ranks[i].husband_ranks}});
        out["matchings"] = all;
      }
      std::cout << out.dump(2) << '\n';
    } else if (*est) {
      const csm::StreamSpec spec{est_seed, 0};
      json out;
      out["what"] = est_what;
      out["n"] = est_n;
      auto put = [&](const char* key, const csm::MCEstimate& e) {
        out[key] = {{"mean", e.mean}, {"se", e.se}, {"count", e.count}};
      };
      const std::map<std::string, csm::Reference> refs = {
          {"p_threshold", csm::Reference::p_threshold},
          {"harmonic_bound", csm::Reference::harmonic_bound},
          {"knuth_asymptotic", csm::Reference::knuth_asymptotic},
          {"delta_n", csm::Reference::delta_n},
          {"rank_scale", csm::Reference::rank_scale}};
      if (auto it = refs.find(est_what); it != refs.end()) {
        try {
          out["value"] = csm::reference_value(est_n, it->second, est_param);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      } else {
        const double p = est_prob.resolve(est_n);
        out["p"] = p;
        try {
          if (est_what == "Pn") {
            put("estimate", csm::mc_Pn(est_n, p, est_samples, spec, est_threads));
          } else if (est_what == "ES") {
            put("estimate", csm::mc_expected_stable(est_n, p, est_samples, spec, est_threads));
          } else if (est_what == "Pnk") {
            out["k"] = est_k;
            put("estimate", csm::mc_Pnk(est_n, p, est_k, est_samples, spec, est_threads));
          } else if (est_what == "ranks") {
            const auto r = csm::mc_rank_probabilities(est_n, p, est_samples, spec, est_threads);
            put("total", r.total);
            json terms = json::array();
            for (std::size_t i = 0; i < r.by_k.size(); ++i)
              terms.push_back({{"k", r.first_k + i}, {"mean", r.by_k[i].mean}, {"se", r.by_k[i].se}});
            out["by_k"] = terms;
          } else if (est_what == "partial") {
            out["l"] = est_l;
            out["k"] = est_k;
            put("estimate", csm::mc_Pnk_partial(est_n, est_l, p, est_k, est_samples, spec, est_threads));
          } else if (est_what == "bound") {
            out["l"] = est_l;
            const auto b = csm::partial_bound(est_n, est_l, p, est_samples, spec, est_threads);
            put("full", b.full);
            put("loose", b.loose);
          } else {
            throw ConfigError("unknown --what '" + est_what + "'");
          }
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
      std::cout << out.dump(2) << '\n';
    } else if (*sp) {
      csm::MaxSpacingReport r;
      try {
        r = csm::lemma2_check(sp_l, sp_trials, sp_rho, sp_delta, {sp_seed, 0}, sp_threads);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      json out;
      out["l"] = sp_l;
      out["trials"] = r.trials;
      out["lower_threshold"] = r.lower_threshold;
      out["upper_threshold"] = r.upper_threshold;
      out["exact_below_lower"] = r.exact_below_lower;
      out["exact_below_upper"] = r.exact_below_upper;
      out["fraction_below_lower"] = r.fraction_below_lower;
      out["fraction_below_upper"] = r.fraction_below_upper;
      out["mean_scaled_U"] = r.scaled_U.mean;
      out["se_scaled_U"] = r.scaled_U.se;
      out["fraction_U_deviating"] = r.fraction_U_deviating;
      std::cout << out.dump(2) << '\n';
    } else if (*sw) {
      csm::SweepConfig config;
      if (!sw_config.empty()) config = csm::load_config(sw_config, config);
      for (const auto& [key, value] : sw_flags)
        if (sw->count("--" + key) > 0) csm::apply_setting(config, key, value);
      if (sw_timing) config.timing = true;
      csm::validate(config);
      const auto rows = csm::run_sweep(config);
      csm::emit(rows, config.format, config.out, config.timing);
    }
  } catch (const ConfigError& e) {
    std::cerr << "csm: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "csm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
