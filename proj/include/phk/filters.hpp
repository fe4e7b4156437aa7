#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "phk/rational.hpp"

namespace phk {

// Signed knockoff statistics for one knockoff run. A positive w[i] is
// evidence that variable i beats its knockoff copy; w[i] == 0 counts as
// neither sign anywhere downstream.
struct WStatistics {
  std::vector<double> w;
  int run_id = 0;

  int p() const { return static_cast<int>(w.size()); }
};

enum class StopBranch { ratio, zero_negatives, pfer_count, none };

const char* to_string(StopBranch b);

// A data-dependent stopping point on the magnitude grid. The infimum over
// continuous t > 0 is realized on the finite grid of nonzero |w| values
// (counts are step functions, constant between magnitudes); a sentinel
// max|w|+1 covers the no-negatives condition when the largest magnitude is
// negative. `value` is +infinity only for the plain ratio rule.
struct Threshold {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> grid;  // ascending unique nonzero magnitudes, sentinel last
  StopBranch branch = StopBranch::none;

  bool finite() const { return std::isfinite(value); }
  double sentinel() const { return grid.back(); }
};

enum class Method { bc, ph, pfer, dph, rwc };

const char* to_string(Method m);
std::optional<Method> method_from_string(const std::string& s);

struct FilterOutcome {
  Method method = Method::bc;
  Threshold threshold;
  std::vector<int> rejections;  // 0-based, ascending
  double alpha = 0.0;           // reported level; NaN for the pfer rule
  std::optional<Rational> alpha_exact;  // set when alpha was derived from counts
  std::optional<int> nu;                // set for the pfer rule
};

// Per-run e-values: e[i] = p * 1{w[i] >= T} / (1 + #{w[l] <= -T}).
struct RunEValues {
  std::vector<Rational> e;
  int run_id = 0;
};

// Smallest grid t with #{w >= t} / (1 + #{w <= -t}) >= 1/alpha_kn, else +inf.
Threshold threshold_bc(const WStatistics& w, double alpha_kn);

// As threshold_bc, but also stops once #{w <= -t} == 0; always finite.
Threshold threshold_ph(const WStatistics& w, double alpha_kn);

// Smallest grid-with-sentinel t with #{w <= -t} <= nu - 1.
Threshold threshold_pfer(const WStatistics& w, int nu);

FilterOutcome filter_bc(const WStatistics& w, double alpha_kn);

// Rejects at the ph stopping time and reports the post-hoc level
// (1 + #{w <= -T}) / #{w >= T}, or alpha_kn when nothing is rejected.
FilterOutcome filter_ph(const WStatistics& w, double alpha_kn);

FilterOutcome filter_pfer(const WStatistics& w, int nu);

RunEValues run_evalues(const WStatistics& w, const Threshold& threshold, int p);

}  // namespace phk
