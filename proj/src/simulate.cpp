#include "phk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phk {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 rep_rng(std::uint64_t base_seed, int rep_id) {
  return std::mt19937_64(splitmix64(base_seed ^ static_cast<std::uint64_t>(rep_id)));
}

std::mt19937_64 truth_rng(std::uint64_t base_seed) {
  return std::mt19937_64(splitmix64(base_seed + 0x5eedbe7a5eedbe7aULL));
}

bool GroundTruth::is_null(int i) const {
  return !std::binary_search(relevant.begin(), relevant.end(), i);
}

void validate(const Scenario& s) {
  if (s.n < 1 || s.p < 1) throw std::invalid_argument("Scenario: n and p must be >= 1");
  if (s.p_relevant < 0 || s.p_relevant > s.p)
    throw std::invalid_argument("Scenario: p_relevant must be in [0, p]");
  if (!(std::fabs(s.rho) < 1.0)) throw std::invalid_argument("Scenario: |rho| must be < 1");
  if (!(s.alpha_kn > 0.0 && s.alpha_kn <= 1.0))
    throw std::invalid_argument("Scenario: alpha_kn must be in (0, 1]");
  if (!(s.alpha_ebh >= 0.0 && s.alpha_ebh <= 1.0))
    throw std::invalid_argument("Scenario: alpha_ebh must be in [0, 1]");
  if (s.k < 1) throw std::invalid_argument("Scenario: k must be >= 1");
  if (s.nu && *s.nu < 1) throw std::invalid_argument("Scenario: nu must be >= 1");
  if (s.reps < 1) throw std::invalid_argument("Scenario: reps must be >= 1");
  if (s.spacing && s.p_relevant > 0) {
    if (*s.spacing < 0) throw std::invalid_argument("Scenario: spacing must be >= 0");
    if ((*s.spacing) * s.p_relevant + s.p_relevant > s.p)
      throw std::invalid_argument("Scenario: spacing does not fit the embedding");
  }
}

GroundTruth build_beta_spaced(int p, int p_relevant, int spacing, double amplitude,
                              int n, std::mt19937_64& rng) {
  GroundTruth truth;
  truth.beta = Eigen::VectorXd::Zero(p);
  truth.spacing = spacing;
  if (p_relevant == 0) return truth;
  if (spacing < 0 || spacing * p_relevant + p_relevant > p)
    throw std::invalid_argument("build_beta: spacing does not fit the embedding");
  std::normal_distribution<double> signal(amplitude, 1.0);
  double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < p_relevant; ++j) {
    int pos = j * (spacing + 1) + spacing;
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    truth.beta[pos] = sign * signal(rng) * scale;
    truth.relevant.push_back(pos);
  }
  return truth;
}

GroundTruth build_beta(int p, int p_relevant, double amplitude, int n,
                       std::mt19937_64& rng) {
  if (p_relevant == 0) {
    GroundTruth truth;
    truth.beta = Eigen::VectorXd::Zero(p);
    return truth;
  }
  int spacing = (p - p_relevant) / p_relevant;
  return build_beta_spaced(p, p_relevant, spacing, amplitude, n, rng);
}

Eigen::VectorXd gen_response(const DesignMatrix& x, const GroundTruth& truth,
                             Family family, std::mt19937_64& rng) {
  if (x.p() != truth.beta.size())
    throw std::invalid_argument("gen_response: shape mismatch");
  Eigen::VectorXd linear = x.values * truth.beta;
  Eigen::VectorXd y(x.n());
  if (family == Family::gaussian) {
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int i = 0; i < x.n(); ++i) y[i] = linear[i] + noise(rng);
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < x.n(); ++i) {
      double prob = 1.0 / (1.0 + std::exp(-linear[i]));
      y[i] = unif(rng) < prob ? 1.0 : 0.0;
    }
  }
  return y;
}

namespace {

MetricsRecord score(int rep, Method method, const std::vector<int>& rejections,
                    double alpha, const GroundTruth& truth) {
  MetricsRecord rec;
  rec.rep_id = rep;
  rec.method = method;
  rec.n_rejections = static_cast<int>(rejections.size());
  int true_hits = 0;
  for (int i : rejections)
    if (!truth.is_null(i)) ++true_hits;
  int false_hits = rec.n_rejections - true_hits;
  rec.fdp = rec.n_rejections == 0
                ? 0.0
                : static_cast<double>(false_hits) / rec.n_rejections;
  auto n_relevant = static_cast<int>(truth.relevant.size());
  rec.power_contrib =
      n_relevant == 0 ? 0.0 : static_cast<double>(true_hits) / n_relevant;
  rec.alpha = alpha;
  return rec;
}

// The records.csv entry for the posthoc-eta rule: the grid point with the
// most rejections, ties to the larger eta.
std::pair<double, RejectionReport> pick_rwc_entry(
    std::vector<std::pair<double, RejectionReport>> grid) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i].second.rejections.size() >= grid[best].second.rejections.size())
      best = i;
  return grid[best];
}

struct RepContext {
  const Scenario* scenario;
  const std::vector<Method>* methods;
  const CovarianceMatrix* cov;
  const KnockoffSampler* sampler;
  const GroundTruth* truth;
  FitConfig fit;
  int k_needed;
};

void simulate_one_rep(const RepContext& ctx, int rep, std::vector<MetricsRecord>& out,
                      std::vector<WStatistics>& runs_out) {
  const Scenario& sc = *ctx.scenario;
  std::mt19937_64 rng = rep_rng(sc.base_seed, rep);
  out.clear();
  runs_out.clear();
  try {
    DesignMatrix x = sample_design(sc.n, *ctx.cov, rng);
    Eigen::VectorXd y = gen_response(x, *ctx.truth, sc.family, rng);
    runs_out.reserve(ctx.k_needed);
    for (int j = 0; j < ctx.k_needed; ++j) {
      KnockoffMatrix xt = ctx.sampler->sample(x, rng);
      runs_out.push_back(
          knockoff_statistics(x.values, xt.values, y, ctx.fit, rng, j));
    }
    for (Method m : *ctx.methods) {
      switch (m) {
        case Method::bc: {
          FilterOutcome fo = filter_bc(runs_out.front(), sc.alpha_kn);
          out.push_back(score(rep, m, fo.rejections, fo.alpha, *ctx.truth));
          break;
        }
        case Method::ph: {
          FilterOutcome fo = filter_ph(runs_out.front(), sc.alpha_kn);
          out.push_back(score(rep, m, fo.rejections, fo.alpha, *ctx.truth));
          break;
        }
        case Method::dph: {
          std::vector<WStatistics> kruns(runs_out.begin(),
                                         runs_out.begin() + sc.k);
          RejectionReport rep_dph = filter_dph(kruns, sc.alpha_kn, sc.alpha_ebh);
          out.push_back(
              score(rep, m, rep_dph.rejections, rep_dph.alpha_or_eta, *ctx.truth));
          break;
        }
        case Method::rwc: {
          if (!sc.nu) throw std::invalid_argument("rwc method needs Scenario.nu");
          std::vector<WStatistics> kruns(runs_out.begin(),
                                         runs_out.begin() + sc.k);
          auto entry = pick_rwc_entry(rwc_posthoc_eta(kruns, *sc.nu));
          out.push_back(score(rep, m, entry.second.rejections, entry.first,
                              *ctx.truth));
          break;
        }
        case Method::pfer:
          throw std::invalid_argument("run_scenario: unsupported method pfer");
      }
    }
  } catch (const std::exception&) {
    // A pathological draw must not poison the sweep; log the rep as failed.
    out.clear();
    for (Method m : *ctx.methods) {
      MetricsRecord rec;
      rec.rep_id = rep;
      rec.method = m;
      rec.failed = true;
      out.push_back(rec);
    }
  }
}

std::vector<MetricsRecord> run_impl(const Scenario& scenario,
                                    const std::vector<Method>& methods,
                                    const RunOptions& options, bool parallel) {
  validate(scenario);
  if (methods.empty()) throw std::invalid_argument("run_scenario: no methods");

  RepContext ctx;
  ctx.scenario = &scenario;
  ctx.methods = &methods;
  CovarianceMatrix cov = ar1_covariance(scenario.p, scenario.rho);
  KnockoffConfig kcfg = equicorrelated_s(cov);
  KnockoffSampler sampler(cov, kcfg);
  std::mt19937_64 trng = truth_rng(scenario.base_seed);
  GroundTruth truth =
      scenario.spacing
          ? build_beta_spaced(scenario.p, scenario.p_relevant, *scenario.spacing,
                              scenario.amplitude, scenario.n, trng)
          : build_beta(scenario.p, scenario.p_relevant, scenario.amplitude,
                       scenario.n, trng);
  ctx.cov = &cov;
  ctx.sampler = &sampler;
  ctx.truth = &truth;
  ctx.fit = options.fit.value_or(FitConfig{});
  ctx.fit.family = scenario.family;
  bool needs_k = std::any_of(methods.begin(), methods.end(), [](Method m) {
    return m == Method::dph || m == Method::rwc;
  });
  ctx.k_needed = needs_k ? scenario.k : 1;

  std::vector<std::vector<MetricsRecord>> per_rep(scenario.reps);

  if (!parallel) {
    std::vector<WStatistics> runs;
    for (int rep = 0; rep < scenario.reps; ++rep) {
      simulate_one_rep(ctx, rep, per_rep[rep], runs);
      if (options.observer) options.observer(RepArtifacts{rep, truth, runs});
    }
  } else {
#ifdef _OPENMP
    if (options.threads > 0) omp_set_num_threads(options.threads);
#pragma omp parallel
#endif
    {
      std::vector<WStatistics> runs;
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
      for (int rep = 0; rep < scenario.reps; ++rep) {
        simulate_one_rep(ctx, rep, per_rep[rep], runs);
        if (options.observer) {
#ifdef _OPENMP
#pragma omp critical(phk_observer)
#endif
          options.observer(RepArtifacts{rep, truth, runs});
        }
      }
    }
  }

  std::vector<MetricsRecord> records;
  records.reserve(static_cast<std::size_t>(scenario.reps) * methods.size());
  for (auto& rows : per_rep)
    for (auto& r : rows) records.push_back(r);
  return records;
}

}  // namespace

std::vector<MetricsRecord> run_scenario(const Scenario& scenario,
                                        const std::vector<Method>& methods,
                                        const RunOptions& options) {
  return run_impl(scenario, methods, options, true);
}

std::vector<MetricsRecord> run_scenario_serial(const Scenario& scenario,
                                               const std::vector<Method>& methods,
                                               const RunOptions& options) {
  return run_impl(scenario, methods, options, false);
}

std::vector<MethodSummary> aggregate_metrics(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate_metrics: no records");
  std::vector<Method> order;
  for (const auto& r : records)
    if (std::find(order.begin(), order.end(), r.method) == order.end())
      order.push_back(r.method);

  std::vector<MethodSummary> out;
  for (Method m : order) {
    MethodSummary s;
    s.method = m;
    std::vector<double> ratios;
    for (const auto& r : records) {
      if (r.method != m) continue;
      if (r.failed) {
        ++s.n_failed;
        continue;
      }
      ++s.n_used;
      s.power += r.power_contrib;
      s.fdr += r.fdp;
      s.mean_alpha += r.alpha;
      ratios.push_back(r.fdp / r.alpha);
    }
    if (s.n_used > 0) {
      s.power /= s.n_used;
      s.fdr /= s.n_used;
      s.mean_alpha /= s.n_used;
      double mean = 0.0;
      for (double v : ratios) mean += v;
      mean /= ratios.size();
      s.avg_fdp_over_alpha = mean;
      if (ratios.size() > 1) {
        double ss = 0.0;
        for (double v : ratios) ss += (v - mean) * (v - mean);
        s.se_ratio = std::sqrt(ss / (ratios.size() - 1.0) / ratios.size());
      }
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace phk
