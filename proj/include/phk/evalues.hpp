#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "phk/filters.hpp"
#include "phk/rational.hpp"

namespace phk {

// Compound e-values aggregated over k knockoff runs, kept exact.
struct EValueVector {
  std::vector<Rational> e_avg;                // length p, column means of per_run
  int k = 0;
  std::vector<std::vector<Rational>> per_run;  // k x p

  int p() const { return static_cast<int>(e_avg.size()); }
};

EValueVector average_evalues(const std::vector<RunEValues>& runs);

// Wraps a raw e-vector as a single-run EValueVector (testing / CLI input).
EValueVector evalue_vector_from(const std::vector<Rational>& e);

enum class CertificateRule { ebh_index, argmax_index, eta_grid, closure_search, none };

const char* to_string(CertificateRule r);

struct Certificate {
  CertificateRule rule = CertificateRule::none;
  int index = 0;      // i_ebh or i* (1-based order-statistic index), else 0
  double eta = 0.0;   // grid point for the eta rule
};

struct RejectionReport {
  std::vector<int> rejections;  // 0-based, ascending
  double alpha_or_eta = 0.0;
  std::optional<Rational> alpha_exact;  // set when the level came from counts
  Certificate certificate;
};

// e-BH on the compound e-values: i_ebh = max{i : E_(i) >= p/(alpha i)} with
// descending sort, ties by ascending index; rejects {i : E_i >= p/(alpha i_ebh)}.
RejectionReport ebh(const EValueVector& e, double alpha);

// Derandomized post-hoc filter: per-run ph thresholds, compound e-values,
// then either certifies the e-BH set at a level <= alpha_ebh or raises the
// level to the smallest one yielding a nonempty e-BH set.
RejectionReport filter_dph(const std::vector<WStatistics>& runs, double alpha_kn,
                           double alpha_ebh);

// A family of local e-values E_S indexed by subsets S of [p].
struct LocalEFamily {
  enum class Kind { ph, averaged, improved, pfer_averaged };

  Kind kind = Kind::averaged;
  int p = 0;
  // ph / improved: per-run selection patterns at the stopping time.
  std::vector<std::vector<std::uint8_t>> pos_runs;  // k x p, w >= T
  std::vector<std::vector<std::uint8_t>> neg_runs;  // k x p, w <= -T
  int ph_denominator = 1;  // ph kind: 1 + #{w <= -T} over all of [p]
  // averaged / pfer_averaged:
  std::vector<Rational> e_avg;
};

const char* to_string(LocalEFamily::Kind k);

LocalEFamily make_ph_family(const WStatistics& w, const Threshold& threshold);
LocalEFamily make_averaged_family(const EValueVector& e);
LocalEFamily make_pfer_averaged_family(const std::vector<WStatistics>& runs, int nu);
LocalEFamily make_improved_family(const std::vector<WStatistics>& runs, double alpha_kn);
LocalEFamily make_improved_family_from_patterns(
    std::vector<std::vector<std::uint8_t>> pos_runs,
    std::vector<std::vector<std::uint8_t>> neg_runs);

// Exact value of E_S for the family's formula; S holds 0-based indices.
Rational local_evalue(const LocalEFamily& family, const std::vector<int>& S);

// True iff E_S >= FDP_S(R)/alpha for every S subseteq [p]. The averaged
// kinds use the sorted-prefix shortcut (any p); ph/improved enumerate all
// 2^p subsets and require p <= 20.
bool closure_membership(const std::vector<int>& R, double alpha,
                        const LocalEFamily& family);
bool closure_membership(const std::vector<int>& R, const Rational& alpha,
                        const LocalEFamily& family);
// Serial reference for the exhaustive scan (no worker partitioning).
bool closure_membership_serial(const std::vector<int>& R, double alpha,
                               const LocalEFamily& family);

// Brute-force maximum-cardinality member of the closure set under the
// improved family, ties broken lexicographically on the sorted index
// sequence. Doubly exponential; requires p <= 12.
RejectionReport closed_knockoff_search(const std::vector<WStatistics>& runs,
                                       double alpha, double alpha_kn);
RejectionReport closed_knockoff_search_serial(const std::vector<WStatistics>& runs,
                                              double alpha, double alpha_kn);
// Search core over a prebuilt improved family (testing / benchmarks).
RejectionReport closed_search_from_family(const LocalEFamily& improved, double alpha,
                                          bool parallel);

// Derandomized PFER selection: rejects i when the fraction of runs with
// w_i >= T_pfer is at least eta.
RejectionReport rwc_rejections(const std::vector<WStatistics>& runs, int nu, double eta);

// One entry per grid point eta in {r/k : r in [k]}.
std::vector<std::pair<double, RejectionReport>> rwc_posthoc_eta(
    const std::vector<WStatistics>& runs, int nu);

}  // namespace phk
