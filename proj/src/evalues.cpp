#include "phk/evalues.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace phk {

const char* to_string(CertificateRule r) {
  switch (r) {
    case CertificateRule::ebh_index: return "ebh_index";
    case CertificateRule::argmax_index: return "argmax_index";
    case CertificateRule::eta_grid: return "eta_grid";
    case CertificateRule::closure_search: return "closure_search";
    case CertificateRule::none: return "none";
  }
  return "none";
}

const char* to_string(LocalEFamily::Kind k) {
  switch (k) {
    case LocalEFamily::Kind::ph: return "ph";
    case LocalEFamily::Kind::averaged: return "averaged";
    case LocalEFamily::Kind::improved: return "improved";
    case LocalEFamily::Kind::pfer_averaged: return "pfer_averaged";
  }
  return "averaged";
}

EValueVector average_evalues(const std::vector<RunEValues>& runs) {
  if (runs.empty()) throw std::invalid_argument("average_evalues: no runs");
  const int p = static_cast<int>(runs.front().e.size());
  const int k = static_cast<int>(runs.size());
  EValueVector out;
  out.k = k;
  out.per_run.reserve(k);
  for (const auto& r : runs) {
    if (static_cast<int>(r.e.size()) != p)
      throw std::invalid_argument("average_evalues: mismatched dimensions");
    out.per_run.push_back(r.e);
  }
  out.e_avg.assign(p, Rational());
  for (int i = 0; i < p; ++i) {
    Rational sum;
    for (int j = 0; j < k; ++j) sum += out.per_run[j][i];
    out.e_avg[i] = sum / k;
  }
  return out;
}

EValueVector evalue_vector_from(const std::vector<Rational>& e) {
  EValueVector out;
  out.k = 1;
  out.e_avg = e;
  out.per_run = {e};
  return out;
}

namespace {

void check_unit_level(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument(std::string(what) + " must be in (0, 1]");
}

// Order-statistic permutation: descending e-value, ties by ascending index.
std::vector<int> descending_order(const std::vector<Rational>& e) {
  std::vector<int> order(e.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    int c = cmp(e[a], e[b]);
    if (c != 0) return c > 0;
    return a < b;
  });
  return order;
}

// E >= p/(alpha * i), exact; false for E == 0 or alpha == 0.
bool clears_ebh_bar(const Rational& e, int i, int p, double alpha) {
  if (e.num() <= 0 || alpha <= 0.0) return false;
  // alpha >= p*den / (num*i)
  return cmp_ratio_to_double(detail::i128(p) * e.den(),
                             detail::i128(e.num()) * i, alpha) <= 0;
}

}  // namespace

RejectionReport ebh(const EValueVector& ev, double alpha) {
  check_unit_level(alpha, "alpha");
  const int p = ev.p();
  std::vector<int> order = descending_order(ev.e_avg);
  int i_ebh = 0;
  for (int i = p; i >= 1; --i) {
    if (clears_ebh_bar(ev.e_avg[order[i - 1]], i, p, alpha)) {
      i_ebh = i;
      break;
    }
  }
  RejectionReport rep;
  rep.alpha_or_eta = alpha;
  rep.certificate.rule = i_ebh > 0 ? CertificateRule::ebh_index : CertificateRule::none;
  rep.certificate.index = i_ebh;
  if (i_ebh > 0) {
    for (int i = 0; i < p; ++i)
      if (clears_ebh_bar(ev.e_avg[i], i_ebh, p, alpha)) rep.rejections.push_back(i);
  }
  return rep;
}

RejectionReport filter_dph(const std::vector<WStatistics>& runs, double alpha_kn,
                           double alpha_ebh) {
  if (runs.empty()) throw std::invalid_argument("filter_dph: no runs");
  if (!(alpha_ebh >= 0.0 && alpha_ebh <= 1.0))
    throw std::invalid_argument("alpha_ebh must be in [0, 1]");
  const int p = runs.front().p();
  std::vector<RunEValues> evs;
  evs.reserve(runs.size());
  for (const auto& r : runs) {
    if (r.p() != p) throw std::invalid_argument("filter_dph: mismatched dimensions");
    evs.push_back(run_evalues(r, threshold_ph(r, alpha_kn), p));
  }
  EValueVector ev = average_evalues(evs);
  std::vector<int> order = descending_order(ev.e_avg);

  RejectionReport rep;
  if (p == 0) {
    rep.alpha_or_eta = alpha_kn;
    return rep;
  }
  int i_ebh = 0;
  for (int i = p; i >= 1; --i) {
    if (clears_ebh_bar(ev.e_avg[order[i - 1]], i, p, alpha_ebh)) {
      i_ebh = i;
      break;
    }
  }
  if (i_ebh > 0) {
    const Rational& eb = ev.e_avg[order[i_ebh - 1]];
    for (int i = 0; i < p; ++i)
      if (clears_ebh_bar(ev.e_avg[i], i_ebh, p, alpha_ebh)) rep.rejections.push_back(i);
    Rational a = Rational::from_i128(detail::i128(p) * eb.den(),
                                     detail::i128(i_ebh) * eb.num());
    rep.alpha_exact = a;
    rep.alpha_or_eta = a.to_double();
    rep.certificate = {CertificateRule::ebh_index, i_ebh, 0.0};
    return rep;
  }

  // No e-BH rejections at alpha_ebh: raise the level to the smallest one
  // that certifies a nonempty set, if any. Largest index wins ties.
  int i_star = 1;
  for (int i = 2; i <= p; ++i) {
    const Rational& ei = ev.e_avg[order[i - 1]];
    const Rational& eb = ev.e_avg[order[i_star - 1]];
    Rational cur = Rational::from_i128(detail::i128(i) * ei.num(), ei.den());
    Rational best = Rational::from_i128(detail::i128(i_star) * eb.num(), eb.den());
    if (cmp(cur, best) >= 0) i_star = i;
  }
  const Rational& es = ev.e_avg[order[i_star - 1]];
  // i* E_(i*) < p ?
  if (detail::i128(i_star) * es.num() < detail::i128(p) * es.den()) {
    rep.alpha_or_eta = alpha_kn;
    rep.certificate = {CertificateRule::none, 0, 0.0};
    return rep;
  }
  Rational a = Rational::from_i128(detail::i128(p) * es.den(),
                                   detail::i128(i_star) * es.num());
  rep.alpha_exact = a;
  rep.alpha_or_eta = a.to_double();
  for (int i = 0; i < p; ++i)
    if (cmp(ev.e_avg[i], es) >= 0) rep.rejections.push_back(i);
  rep.certificate = {CertificateRule::argmax_index, i_star, 0.0};
  return rep;
}

namespace {

std::vector<std::uint8_t> pattern_ge(const WStatistics& w, double t) {
  std::vector<std::uint8_t> v(w.p(), 0);
  for (int i = 0; i < w.p(); ++i) v[i] = (w.w[i] >= t && w.w[i] > 0.0) ? 1 : 0;
  return v;
}

std::vector<std::uint8_t> pattern_le_neg(const WStatistics& w, double t) {
  std::vector<std::uint8_t> v(w.p(), 0);
  for (int i = 0; i < w.p(); ++i) v[i] = (w.w[i] <= -t && w.w[i] < 0.0) ? 1 : 0;
  return v;
}

}  // namespace

LocalEFamily make_ph_family(const WStatistics& w, const Threshold& threshold) {
  if (!threshold.finite())
    throw std::invalid_argument("make_ph_family: threshold must be finite");
  LocalEFamily fam;
  fam.kind = LocalEFamily::Kind::ph;
  fam.p = w.p();
  fam.pos_runs = {pattern_ge(w, threshold.value)};
  auto neg = pattern_le_neg(w, threshold.value);
  fam.ph_denominator = 1 + static_cast<int>(std::count(neg.begin(), neg.end(), 1));
  fam.neg_runs = {std::move(neg)};
  return fam;
}

LocalEFamily make_averaged_family(const EValueVector& e) {
  LocalEFamily fam;
  fam.kind = LocalEFamily::Kind::averaged;
  fam.p = e.p();
  fam.e_avg = e.e_avg;
  return fam;
}

LocalEFamily make_pfer_averaged_family(const std::vector<WStatistics>& runs, int nu) {
  if (runs.empty()) throw std::invalid_argument("make_pfer_averaged_family: no runs");
  const int p = runs.front().p();
  std::vector<RunEValues> evs;
  for (const auto& r : runs) evs.push_back(run_evalues(r, threshold_pfer(r, nu), p));
  LocalEFamily fam;
  fam.kind = LocalEFamily::Kind::pfer_averaged;
  fam.p = p;
  fam.e_avg = average_evalues(evs).e_avg;
  return fam;
}

LocalEFamily make_improved_family(const std::vector<WStatistics>& runs, double alpha_kn) {
  if (runs.empty()) throw std::invalid_argument("make_improved_family: no runs");
  LocalEFamily fam;
  fam.kind = LocalEFamily::Kind::improved;
  fam.p = runs.front().p();
  for (const auto& r : runs) {
    if (r.p() != fam.p)
      throw std::invalid_argument("make_improved_family: mismatched dimensions");
    Threshold t = threshold_ph(r, alpha_kn);
    fam.pos_runs.push_back(pattern_ge(r, t.value));
    fam.neg_runs.push_back(pattern_le_neg(r, t.value));
  }
  return fam;
}

LocalEFamily make_improved_family_from_patterns(
    std::vector<std::vector<std::uint8_t>> pos_runs,
    std::vector<std::vector<std::uint8_t>> neg_runs) {
  if (pos_runs.empty() || pos_runs.size() != neg_runs.size())
    throw std::invalid_argument("pattern family: bad run lists");
  LocalEFamily fam;
  fam.kind = LocalEFamily::Kind::improved;
  fam.p = static_cast<int>(pos_runs.front().size());
  for (std::size_t j = 0; j < pos_runs.size(); ++j)
    if (static_cast<int>(pos_runs[j].size()) != fam.p ||
        static_cast<int>(neg_runs[j].size()) != fam.p)
      throw std::invalid_argument("pattern family: mismatched dimensions");
  fam.pos_runs = std::move(pos_runs);
  fam.neg_runs = std::move(neg_runs);
  return fam;
}

Rational local_evalue(const LocalEFamily& fam, const std::vector<int>& S) {
  std::vector<std::uint8_t> in(fam.p, 0);
  for (int i : S) {
    if (i < 0 || i >= fam.p) throw std::invalid_argument("local_evalue: index out of range");
    in[i] = 1;
  }
  switch (fam.kind) {
    case LocalEFamily::Kind::ph: {
      std::int64_t count = 0;
      for (int i = 0; i < fam.p; ++i)
        if (in[i] && fam.pos_runs[0][i]) ++count;
      return Rational(count, fam.ph_denominator);
    }
    case LocalEFamily::Kind::averaged:
    case LocalEFamily::Kind::pfer_averaged: {
      Rational sum;
      for (int i = 0; i < fam.p; ++i)
        if (in[i]) sum += fam.e_avg[i];
      return sum / fam.p;
    }
    case LocalEFamily::Kind::improved: {
      Rational sum;
      const int k = static_cast<int>(fam.pos_runs.size());
      for (int j = 0; j < k; ++j) {
        std::int64_t a = 0, b = 0;
        for (int i = 0; i < fam.p; ++i) {
          if (!in[i]) continue;
          a += fam.pos_runs[j][i];
          b += fam.neg_runs[j][i];
        }
        sum += Rational(a, 1 + b);
      }
      return sum / k;
    }
  }
  return Rational();
}

namespace {

constexpr int kExhaustiveMaxP = 20;
constexpr int kSearchMaxP = 12;

std::int64_t lcm_upto(int m) {
  std::int64_t l = 1;
  for (int v = 2; v <= m; ++v) l = std::lcm(l, static_cast<std::int64_t>(v));
  return l;
}

// Improved family with bitmask patterns and a shared denominator table:
// E_S * (k * D) = sum_j popcount(S & pos_j) * D/(1 + popcount(S & neg_j)),
// all in plain int64 (D = lcm(1..p+1) <= lcm(1..21) fits easily).
struct MaskedFamily {
  int p = 0;
  int k = 1;
  bool improved = false;  // else ph kind
  std::vector<std::uint32_t> pos, neg;
  std::vector<std::int64_t> recip;  // D/(1+b) for b = 0..p
  std::int64_t scaled_den = 1;      // k * D (improved) or ph_denominator (ph)

  std::int64_t scaled_value(std::uint32_t S) const {
    if (!improved) return std::popcount(S & pos[0]);
    std::int64_t sum = 0;
    for (std::size_t j = 0; j < pos.size(); ++j)
      sum += std::int64_t(std::popcount(S & pos[j])) * recip[std::popcount(S & neg[j])];
    return sum;
  }
};

MaskedFamily make_masked(const LocalEFamily& fam) {
  MaskedFamily mf;
  mf.p = fam.p;
  mf.k = static_cast<int>(fam.pos_runs.size());
  mf.improved = fam.kind == LocalEFamily::Kind::improved;
  for (int j = 0; j < mf.k; ++j) {
    std::uint32_t pm = 0, nm = 0;
    for (int i = 0; i < fam.p; ++i) {
      if (fam.pos_runs[j][i]) pm |= (1u << i);
      if (fam.neg_runs[j][i]) nm |= (1u << i);
    }
    mf.pos.push_back(pm);
    mf.neg.push_back(nm);
  }
  if (mf.improved) {
    std::int64_t D = lcm_upto(fam.p + 1);
    for (int b = 0; b <= fam.p; ++b) mf.recip.push_back(D / (1 + b));
    mf.scaled_den = D * mf.k;
  } else {
    mf.scaled_den = fam.ph_denominator;
  }
  return mf;
}

// E_S >= FDP_S(R)/alpha for one S, with E_S given as value/scaled_den.
inline bool subset_ok(const MaskedFamily& mf, std::uint32_t S, std::uint32_t Rmask,
                      int r_size, const Level& level) {
  int m_r = std::popcount(S & Rmask);
  if (m_r == 0) return true;
  std::int64_t val = mf.scaled_value(S);
  if (val == 0) return false;
  // alpha >= m_r * scaled_den / (val * |R|)
  return level.at_least(detail::i128(m_r) * mf.scaled_den,
                        detail::i128(val) * r_size);
}

bool exhaustive_membership(const MaskedFamily& mf, std::uint32_t Rmask,
                           const Level& level, bool parallel) {
  const int r_size = std::popcount(Rmask);
  if (r_size == 0) return true;
  const std::uint32_t total = 1u << mf.p;

  if (!parallel) {
    for (std::uint32_t S = 1; S < total; ++S)
      if (!subset_ok(mf, S, Rmask, r_size, level)) return false;
    return true;
  }

  std::atomic<bool> violated{false};
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t S = 1; S < static_cast<std::int64_t>(total); ++S) {
    if (violated.load(std::memory_order_relaxed)) continue;
    if (!subset_ok(mf, static_cast<std::uint32_t>(S), Rmask, r_size, level))
      violated.store(true, std::memory_order_relaxed);
  }
  return !violated.load();
}

// Shortcut for the averaged kinds: the binding subsets are S subseteq R
// (anything outside R raises E_S without changing |S cap R|), and among
// those the s smallest member e-values; check every prefix.
bool averaged_membership(const LocalEFamily& fam, const std::vector<int>& R,
                         const Level& level) {
  if (R.empty()) return true;
  std::vector<Rational> members;
  members.reserve(R.size());
  for (int i : R) {
    if (i < 0 || i >= fam.p)
      throw std::invalid_argument("closure_membership: index out of range");
    members.push_back(fam.e_avg[i]);
  }
  std::sort(members.begin(), members.end(),
            [](const Rational& a, const Rational& b) { return cmp(a, b) < 0; });
  const auto r_size = static_cast<std::int64_t>(R.size());
  Rational prefix;
  for (std::int64_t s = 1; s <= r_size; ++s) {
    prefix += members[s - 1];
    // E_S = prefix/p >= s/(alpha*|R|)  <=>  alpha >= s*p*den/(num*|R|)
    if (prefix.num() == 0) return false;
    if (!level.at_least(detail::i128(s) * prefix.den() * fam.p,
                        detail::i128(prefix.num()) * r_size))
      return false;
  }
  return true;
}

std::uint32_t mask_from_indices(const std::vector<int>& R, int p) {
  std::uint32_t m = 0;
  for (int i : R) {
    if (i < 0 || i >= p)
      throw std::invalid_argument("closure_membership: index out of range");
    m |= (1u << i);
  }
  return m;
}

bool membership_impl(const std::vector<int>& R, const Level& level,
                     const LocalEFamily& fam, bool parallel) {
  if (fam.kind == LocalEFamily::Kind::averaged ||
      fam.kind == LocalEFamily::Kind::pfer_averaged)
    return averaged_membership(fam, R, level);
  if (fam.p > kExhaustiveMaxP)
    throw std::domain_error("closure_membership: p > 20 requires the averaged family");
  MaskedFamily mf = make_masked(fam);
  return exhaustive_membership(mf, mask_from_indices(R, fam.p), level, parallel);
}

// Strict order for the search: larger cardinality first, then the
// lexicographically smaller sorted index sequence (the mask holding the
// lowest differing bit).
bool better_candidate(std::uint32_t a, std::uint32_t b) {
  int ca = std::popcount(a), cb = std::popcount(b);
  if (ca != cb) return ca > cb;
  if (a == b) return false;
  std::uint32_t low = (a ^ b) & (0u - (a ^ b));
  return (a & low) != 0;
}

std::vector<int> indices_from_mask(std::uint32_t m) {
  std::vector<int> out;
  for (int i = 0; m != 0; ++i, m >>= 1)
    if (m & 1u) out.push_back(i);
  return out;
}

}  // namespace

bool closure_membership(const std::vector<int>& R, double alpha,
                        const LocalEFamily& family) {
  check_unit_level(alpha, "alpha");
  return membership_impl(R, Level(alpha), family, true);
}

bool closure_membership(const std::vector<int>& R, const Rational& alpha,
                        const LocalEFamily& family) {
  if (alpha.num() <= 0) throw std::invalid_argument("alpha must be positive");
  return membership_impl(R, Level(alpha), family, true);
}

bool closure_membership_serial(const std::vector<int>& R, double alpha,
                               const LocalEFamily& family) {
  check_unit_level(alpha, "alpha");
  return membership_impl(R, Level(alpha), family, false);
}

RejectionReport closed_search_from_family(const LocalEFamily& improved, double alpha,
                                          bool parallel) {
  check_unit_level(alpha, "alpha");
  if (improved.kind != LocalEFamily::Kind::improved)
    throw std::invalid_argument("closed search expects the improved family");
  if (improved.p > kSearchMaxP)
    throw std::domain_error("closed_knockoff_search: p > 12 is not supported");
  MaskedFamily mf = make_masked(improved);
  const Level level(alpha);
  const std::int64_t total = std::int64_t(1) << improved.p;

  std::uint32_t best = 0;  // empty set is always a member
  if (!parallel) {
    for (std::int64_t m = 1; m < total; ++m) {
      auto mask = static_cast<std::uint32_t>(m);
      if (!better_candidate(mask, best)) continue;
      if (exhaustive_membership(mf, mask, level, false)) best = mask;
    }
  } else {
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      std::uint32_t local_best = 0;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 64)
#endif
      for (std::int64_t m = 1; m < total; ++m) {
        auto mask = static_cast<std::uint32_t>(m);
        if (!better_candidate(mask, local_best)) continue;
        if (exhaustive_membership(mf, mask, level, false)) local_best = mask;
      }
#ifdef _OPENMP
#pragma omp critical
#endif
      {
        if (better_candidate(local_best, best)) best = local_best;
      }
    }
  }

  RejectionReport rep;
  rep.rejections = indices_from_mask(best);
  rep.alpha_or_eta = alpha;
  rep.certificate = {CertificateRule::closure_search, std::popcount(best), 0.0};
  return rep;
}

RejectionReport closed_knockoff_search(const std::vector<WStatistics>& runs,
                                       double alpha, double alpha_kn) {
  return closed_search_from_family(make_improved_family(runs, alpha_kn), alpha, true);
}

RejectionReport closed_knockoff_search_serial(const std::vector<WStatistics>& runs,
                                              double alpha, double alpha_kn) {
  return closed_search_from_family(make_improved_family(runs, alpha_kn), alpha, false);
}

namespace {

std::vector<int> rwc_counts(const std::vector<WStatistics>& runs, int nu, int* p_out) {
  if (runs.empty()) throw std::invalid_argument("rwc: no runs");
  const int p = runs.front().p();
  std::vector<int> counts(p, 0);
  for (const auto& r : runs) {
    if (r.p() != p) throw std::invalid_argument("rwc: mismatched dimensions");
    Threshold t = threshold_pfer(r, nu);
    for (int i = 0; i < p; ++i)
      if (r.w[i] >= t.value && r.w[i] > 0.0) ++counts[i];
  }
  *p_out = p;
  return counts;
}

}  // namespace

RejectionReport rwc_rejections(const std::vector<WStatistics>& runs, int nu, double eta) {
  check_unit_level(eta, "eta");
  int p = 0;
  std::vector<int> counts = rwc_counts(runs, nu, &p);
  const int k = static_cast<int>(runs.size());
  RejectionReport rep;
  rep.alpha_or_eta = eta;
  rep.certificate = {CertificateRule::eta_grid, 0, eta};
  for (int i = 0; i < p; ++i)
    if (cmp_ratio_to_double(counts[i], k, eta) >= 0) rep.rejections.push_back(i);
  return rep;
}

std::vector<std::pair<double, RejectionReport>> rwc_posthoc_eta(
    const std::vector<WStatistics>& runs, int nu) {
  int p = 0;
  std::vector<int> counts = rwc_counts(runs, nu, &p);
  const int k = static_cast<int>(runs.size());
  std::vector<std::pair<double, RejectionReport>> out;
  out.reserve(k);
  for (int r = 1; r <= k; ++r) {
    Rational eta(r, k);
    RejectionReport rep;
    rep.alpha_or_eta = eta.to_double();
    rep.alpha_exact = eta;
    rep.certificate = {CertificateRule::eta_grid, r, eta.to_double()};
    for (int i = 0; i < p; ++i)
      if (counts[i] >= r) rep.rejections.push_back(i);
    out.emplace_back(eta.to_double(), std::move(rep));
  }
  return out;
}

}  // namespace phk
