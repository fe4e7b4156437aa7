#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "phk/evalues.hpp"
#include "phk/filters.hpp"
#include "phk/gaussian.hpp"
#include "phk/importance.hpp"
#include "phk/lasso.hpp"

namespace phk {

// One simulation setting. `spacing` defaults to the floor rule
// floor((p - p_relevant)/p_relevant) used by build_beta.
struct Scenario {
  Family family = Family::gaussian;
  int n = 250;
  int p = 50;
  int p_relevant = 0;
  double amplitude = 0.0;
  double rho = 0.5;
  std::optional<int> spacing;
  double alpha_kn = 0.2;
  double alpha_ebh = 0.2;
  int k = 1;
  std::optional<int> nu;
  int reps = 100;
  std::uint64_t base_seed = 1;
};

void validate(const Scenario& s);

struct GroundTruth {
  Eigen::VectorXd beta;
  std::vector<int> relevant;  // I1, 0-based ascending
  int spacing = 0;            // z actually used

  bool is_null(int i) const;
};

// Signal embedding: blocks of z zeros, then one signed entry |beta_j| drawn
// N(A,1)/sqrt(n) with alternating block signs, trailing zeros. p_relevant = 0
// is the global null.
GroundTruth build_beta(int p, int p_relevant, double amplitude, int n,
                       std::mt19937_64& rng);
GroundTruth build_beta_spaced(int p, int p_relevant, int spacing, double amplitude,
                              int n, std::mt19937_64& rng);

Eigen::VectorXd gen_response(const DesignMatrix& x, const GroundTruth& truth,
                             Family family, std::mt19937_64& rng);

struct MetricsRecord {
  int rep_id = 0;
  Method method = Method::bc;
  int n_rejections = 0;
  double fdp = 0.0;
  double alpha = 0.0;
  double power_contrib = 0.0;
  bool failed = false;
};

struct MethodSummary {
  Method method = Method::bc;
  double power = 0.0;
  double fdr = 0.0;
  double avg_fdp_over_alpha = 0.0;
  double se_ratio = 0.0;
  double mean_alpha = 0.0;
  int n_used = 0;
  int n_failed = 0;
};

// Everything one replication produced, handed to an observer while the
// record rows are being filled. Called under a lock; references are only
// valid during the call.
struct RepArtifacts {
  int rep_id;
  const GroundTruth& truth;
  const std::vector<WStatistics>& runs;
};
using RepObserver = std::function<void(const RepArtifacts&)>;

struct RunOptions {
  int threads = 0;  // 0 = library default
  std::optional<FitConfig> fit;
  RepObserver observer;
};

// Runs `reps` independent replications and emits one record per
// (replication, method), ordered by rep then by the given method order.
// Each replication draws from its own stream derived from base_seed and the
// rep id, so the output is bit-identical for any thread count.
std::vector<MetricsRecord> run_scenario(const Scenario& scenario,
                                        const std::vector<Method>& methods,
                                        const RunOptions& options = {});

// Plain-loop reference implementation with identical output.
std::vector<MetricsRecord> run_scenario_serial(const Scenario& scenario,
                                               const std::vector<Method>& methods,
                                               const RunOptions& options = {});

std::vector<MethodSummary> aggregate_metrics(const std::vector<MetricsRecord>& records);

// Stream derivation helpers (also used by the tests).
std::uint64_t splitmix64(std::uint64_t x);
std::mt19937_64 rep_rng(std::uint64_t base_seed, int rep_id);
std::mt19937_64 truth_rng(std::uint64_t base_seed);

}  // namespace phk
