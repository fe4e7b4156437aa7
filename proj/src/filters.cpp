#include "phk/filters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phk {

const char* to_string(StopBranch b) {
  switch (b) {
    case StopBranch::ratio: return "ratio";
    case StopBranch::zero_negatives: return "zero_negatives";
    case StopBranch::pfer_count: return "pfer_count";
    case StopBranch::none: return "none";
  }
  return "none";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::bc: return "bc";
    case Method::ph: return "ph";
    case Method::pfer: return "pfer";
    case Method::dph: return "dph";
    case Method::rwc: return "rwc";
  }
  return "bc";
}

std::optional<Method> method_from_string(const std::string& s) {
  if (s == "bc") return Method::bc;
  if (s == "ph") return Method::ph;
  if (s == "pfer") return Method::pfer;
  if (s == "dph") return Method::dph;
  if (s == "rwc") return Method::rwc;
  return std::nullopt;
}

namespace {

struct SignCounts {
  std::vector<double> grid;      // ascending unique nonzero magnitudes + sentinel
  std::vector<double> pos_mags;  // ascending magnitudes of positive w
  std::vector<double> neg_mags;  // ascending magnitudes of negative w

  int pos_at(double t) const {
    auto it = std::lower_bound(pos_mags.begin(), pos_mags.end(), t);
    return static_cast<int>(pos_mags.end() - it);
  }
  int neg_at(double t) const {
    auto it = std::lower_bound(neg_mags.begin(), neg_mags.end(), t);
    return static_cast<int>(neg_mags.end() - it);
  }
};

SignCounts make_counts(const WStatistics& ws) {
  SignCounts c;
  double maxmag = 0.0;
  for (double v : ws.w) {
    if (!std::isfinite(v)) throw std::invalid_argument("knockoff statistics must be finite");
    if (v > 0.0) c.pos_mags.push_back(v);
    else if (v < 0.0) c.neg_mags.push_back(-v);
    else continue;
    maxmag = std::max(maxmag, std::fabs(v));
    c.grid.push_back(std::fabs(v));
  }
  std::sort(c.pos_mags.begin(), c.pos_mags.end());
  std::sort(c.neg_mags.begin(), c.neg_mags.end());
  std::sort(c.grid.begin(), c.grid.end());
  c.grid.erase(std::unique(c.grid.begin(), c.grid.end()), c.grid.end());
  c.grid.push_back(maxmag + 1.0);
  return c;
}

void check_level(double alpha_kn) {
  if (!(alpha_kn > 0.0 && alpha_kn <= 1.0))
    throw std::invalid_argument("alpha_kn must be in (0, 1]");
}

// #{w >= t} >= (1 + #{w <= -t}) / alpha, compared exactly.
bool ratio_fires(const SignCounts& c, double t, double alpha) {
  int pos = c.pos_at(t);
  if (pos == 0) return false;
  return cmp_ratio_to_double(1 + c.neg_at(t), pos, alpha) <= 0;
}

std::vector<int> rejections_at(const WStatistics& ws, double t) {
  std::vector<int> r;
  for (int i = 0; i < ws.p(); ++i)
    if (ws.w[i] >= t && ws.w[i] > 0.0) r.push_back(i);
  return r;
}

}  // namespace

Threshold threshold_bc(const WStatistics& ws, double alpha_kn) {
  check_level(alpha_kn);
  SignCounts c = make_counts(ws);
  Threshold th;
  th.grid = c.grid;
  for (double t : c.grid) {
    if (ratio_fires(c, t, alpha_kn)) {
      th.value = t;
      th.branch = StopBranch::ratio;
      return th;
    }
  }
  th.value = std::numeric_limits<double>::infinity();
  th.branch = StopBranch::none;
  return th;
}

Threshold threshold_ph(const WStatistics& ws, double alpha_kn) {
  check_level(alpha_kn);
  SignCounts c = make_counts(ws);
  Threshold th;
  th.grid = c.grid;
  for (double t : c.grid) {
    if (ratio_fires(c, t, alpha_kn)) {
      th.value = t;
      th.branch = StopBranch::ratio;
      return th;
    }
    if (c.neg_at(t) == 0) {
      th.value = t;
      th.branch = StopBranch::zero_negatives;
      return th;
    }
  }
  // The sentinel always satisfies the no-negatives condition.
  th.value = c.grid.back();
  th.branch = StopBranch::zero_negatives;
  return th;
}

Threshold threshold_pfer(const WStatistics& ws, int nu) {
  if (nu < 1) throw std::invalid_argument("nu must be >= 1");
  SignCounts c = make_counts(ws);
  Threshold th;
  th.grid = c.grid;
  for (double t : c.grid) {
    if (c.neg_at(t) <= nu - 1) {
      th.value = t;
      th.branch = StopBranch::pfer_count;
      return th;
    }
  }
  th.value = c.grid.back();
  th.branch = StopBranch::pfer_count;
  return th;
}

FilterOutcome filter_bc(const WStatistics& ws, double alpha_kn) {
  FilterOutcome out;
  out.method = Method::bc;
  out.threshold = threshold_bc(ws, alpha_kn);
  if (out.threshold.finite()) out.rejections = rejections_at(ws, out.threshold.value);
  out.alpha = alpha_kn;
  return out;
}

FilterOutcome filter_ph(const WStatistics& ws, double alpha_kn) {
  FilterOutcome out;
  out.method = Method::ph;
  out.threshold = threshold_ph(ws, alpha_kn);
  out.rejections = rejections_at(ws, out.threshold.value);
  if (out.rejections.empty()) {
    out.alpha = alpha_kn;
  } else {
    SignCounts c = make_counts(ws);
    Rational a(1 + c.neg_at(out.threshold.value),
               static_cast<std::int64_t>(out.rejections.size()));
    out.alpha_exact = a;
    out.alpha = a.to_double();
  }
  return out;
}

FilterOutcome filter_pfer(const WStatistics& ws, int nu) {
  FilterOutcome out;
  out.method = Method::pfer;
  out.threshold = threshold_pfer(ws, nu);
  out.rejections = rejections_at(ws, out.threshold.value);
  out.alpha = std::numeric_limits<double>::quiet_NaN();
  out.nu = nu;
  return out;
}

RunEValues run_evalues(const WStatistics& ws, const Threshold& threshold, int p) {
  if (!threshold.finite())
    throw std::invalid_argument("run_evalues: threshold must be finite");
  if (p != ws.p())
    throw std::invalid_argument("run_evalues: dimension mismatch");
  SignCounts c = make_counts(ws);
  int denom = 1 + c.neg_at(threshold.value);
  RunEValues out;
  out.run_id = ws.run_id;
  out.e.reserve(ws.p());
  for (int i = 0; i < ws.p(); ++i) {
    bool selected = ws.w[i] >= threshold.value && ws.w[i] > 0.0;
    out.e.push_back(selected ? Rational(p, denom) : Rational());
  }
  return out;
}

}  // namespace phk
