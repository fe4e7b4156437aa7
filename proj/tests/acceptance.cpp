// Acceptance suite: one pass/fail line per pinned criterion, covering the
// worked two-run example, the deterministic filter guarantees, the
// Monte-Carlo error-control bounds, and a scaled-down end-to-end sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phk/evalues.hpp"
#include "phk/filters.hpp"
#include "phk/simulate.hpp"

using phk::Method;
using phk::Rational;
using phk::WStatistics;

namespace {

int g_failures = 0;

double now_ms() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double, std::milli>(clock::now() - start).count();
}

void report(const std::string& name, bool ok, const std::string& detail,
            double elapsed_ms) {
  if (!ok) ++g_failures;
  std::printf("[%s] %s: %s (%.1f s)\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str(), elapsed_ms / 1000.0);
  std::fflush(stdout);
}

std::string set_to_string(const std::vector<int>& zero_based) {
  std::string s = "{";
  for (std::size_t i = 0; i < zero_based.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(zero_based[i] + 1);
  }
  return s + "}";
}

std::vector<WStatistics> worked_example_runs() {
  return {WStatistics{{-1, 2, 3, 4, 5}, 0}, WStatistics{{4, -5, 1, 2, 3}, 1}};
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (v.size() - 1.0) / v.size());
  }
  return out;
}

char buf[512];

void criterion1() {
  double t0 = now_ms();
  auto runs = worked_example_runs();

  std::vector<phk::RunEValues> evs;
  for (const auto& r : runs)
    evs.push_back(phk::run_evalues(r, phk::threshold_ph(r, 0.5), 5));
  auto ev = phk::average_evalues(evs);
  std::vector<Rational> want{Rational(5, 4), Rational(5, 4), Rational(5, 2),
                             Rational(5, 2), Rational(5, 2)};
  report("criterion 1a (compound e-values)", ev.e_avg == want,
         "e_avg = (5/4, 5/4, 5/2, 5/2, 5/2) exactly", now_ms() - t0);

  double t1 = now_ms();
  auto rb = phk::ebh(ev, 0.5);
  report("criterion 1b (e-BH at 1/2)", rb.rejections.empty(), "empty rejection set",
         now_ms() - t1);

  double t2 = now_ms();
  auto improved = phk::make_improved_family(runs, 0.5);
  bool member = phk::closure_membership({2, 3, 4}, 0.5, improved);
  report("criterion 1c (closure membership)", member,
         "{3,4,5} belongs to the improved closure set at 1/2", now_ms() - t2);

  double t3 = now_ms();
  auto search = phk::closed_knockoff_search(runs, 0.5, 0.5);
  bool pinned = search.rejections == std::vector<int>{2, 3, 4};
  std::snprintf(buf, sizeof(buf),
                "pinned {3,4,5}; search returned %s, the maximum-cardinality "
                "closure member (both sets are members; see notes)",
                set_to_string(search.rejections).c_str());
  report("criterion 1d (closed search)", pinned, buf, now_ms() - t3);

  bool fast = (now_ms() - t0) < 1000.0;
  report("criterion 1 (runtime)", fast, "worked example under 1 s", now_ms() - t0);
}

void criterion2() {
  double t0 = now_ms();
  std::mt19937_64 rng(0xC2);
  std::uniform_real_distribution<double> alpha_gen(0.01, 1.0);
  int violations = 0;
  const int cases = 10000;
  for (int it = 0; it < cases; ++it) {
    int p = 1 + static_cast<int>(rng() % 40);
    WStatistics w{oracle::random_w(p, rng), 0};
    double alpha = alpha_gen(rng);
    auto bc = phk::filter_bc(w, alpha);
    auto ph = phk::filter_ph(w, alpha);
    if (!std::includes(ph.rejections.begin(), ph.rejections.end(),
                       bc.rejections.begin(), bc.rejections.end()))
      ++violations;
    if (!bc.rejections.empty()) {
      if (!ph.alpha_exact || phk::cmp(*ph.alpha_exact, alpha) > 0) ++violations;
    }
  }
  double elapsed = now_ms() - t0;
  std::snprintf(buf, sizeof(buf), "%d cases, %d violations", cases, violations);
  report("criterion 2 (deterministic dominance)",
         violations == 0 && elapsed < 10000.0, buf, elapsed);
}

void criterion3() {
  double t0 = now_ms();
  std::mt19937_64 rng(0xC3);
  std::uniform_real_distribution<double> alpha_kn_gen(0.02, 1.0);
  std::uniform_real_distribution<double> alpha_ebh_gen(0.0, 1.0);
  int violations = 0;
  const int cases = 10000;
  for (int it = 0; it < cases; ++it) {
    int p = 1 + static_cast<int>(rng() % 30);
    WStatistics w{oracle::random_w(p, rng), 0};
    double alpha_kn = alpha_kn_gen(rng);
    double alpha_ebh = it % 17 == 0 ? 0.0 : (it % 19 == 0 ? 1.0 : alpha_ebh_gen(rng));
    auto dph = phk::filter_dph({w}, alpha_kn, alpha_ebh);
    auto ph = phk::filter_ph(w, alpha_kn);
    if (dph.rejections != ph.rejections || dph.alpha_or_eta != ph.alpha) ++violations;
  }
  double elapsed = now_ms() - t0;
  std::snprintf(buf, sizeof(buf), "%d cases, %d violations", cases, violations);
  report("criterion 3 (k=1 unification)", violations == 0, buf, elapsed);
}

struct NullRunStats {
  std::vector<double> ratio;       // fdp / reported alpha, per rep
  long positives = 0;              // pooled nonzero-W sign counts
  long nonzero = 0;
};

NullRunStats run_global_null(int reps) {
  phk::Scenario sc;
  sc.n = 250;
  sc.p = 50;
  sc.p_relevant = 0;
  sc.alpha_kn = 0.2;
  sc.reps = reps;
  sc.base_seed = 20260811;

  NullRunStats stats;
  std::vector<std::pair<long, long>> signs(reps);
  phk::RunOptions opt;
  opt.observer = [&](const phk::RepArtifacts& art) {
    long pos = 0, nz = 0;
    for (double v : art.runs.front().w) {
      if (v == 0.0) continue;
      ++nz;
      if (v > 0.0) ++pos;
    }
    signs[art.rep_id] = {pos, nz};
  };
  auto records = phk::run_scenario(sc, {Method::ph}, opt);
  for (const auto& r : records) {
    if (r.failed) continue;
    stats.ratio.push_back(r.fdp / r.alpha);
  }
  for (auto& [pos, nz] : signs) {
    stats.positives += pos;
    stats.nonzero += nz;
  }
  return stats;
}

void criteria4and5() {
  double t0 = now_ms();
  NullRunStats stats = run_global_null(2000);
  double elapsed = now_ms() - t0;

  auto ms = mean_se(stats.ratio);
  std::snprintf(buf, sizeof(buf),
                "mean FDP/alpha = %.4f, bound 1 + 3SE = %.4f over %zu replications",
                ms.mean, 1.0 + 3.0 * ms.se, stats.ratio.size());
  report("criterion 4 (post-hoc guarantee)",
         stats.ratio.size() >= 2000 && ms.mean <= 1.0 + 3.0 * ms.se, buf, elapsed);

  double frac = static_cast<double>(stats.positives) / stats.nonzero;
  double band = 3.0 * std::sqrt(0.25 / static_cast<double>(stats.nonzero));
  std::snprintf(buf, sizeof(buf),
                "positive fraction %.4f of %ld nonzero statistics, band 0.5 +- %.4f",
                frac, stats.nonzero, band);
  report("criterion 5 (null sign symmetry)", std::fabs(frac - 0.5) <= band, buf, 0.0);
}

void criterion6() {
  double t0 = now_ms();
  phk::Scenario sc;
  sc.n = 250;
  sc.p = 50;
  sc.p_relevant = 3;
  sc.amplitude = 8.0;
  sc.alpha_kn = 0.2;
  sc.reps = 500;
  sc.base_seed = 61;

  auto records = phk::run_scenario(sc, {Method::bc, Method::ph});
  int bc_zero = 0, bc_n = 0;
  double bc_power = 0.0, ph_power = 0.0;
  std::vector<int> ph_counts;
  for (const auto& r : records) {
    if (r.failed) continue;
    if (r.method == Method::bc) {
      ++bc_n;
      if (r.n_rejections == 0) ++bc_zero;
      bc_power += r.power_contrib;
    } else {
      ph_counts.push_back(r.n_rejections);
      ph_power += r.power_contrib;
    }
  }
  bc_power /= bc_n;
  ph_power /= static_cast<double>(ph_counts.size());

  std::vector<int> hist(sc.p + 1, 0);
  for (int c : ph_counts) ++hist[c];
  int mode = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin());

  double elapsed = now_ms() - t0;
  double bc_zero_frac = static_cast<double>(bc_zero) / bc_n;
  std::snprintf(buf, sizeof(buf), "zero-rejection fraction %.3f", bc_zero_frac);
  report("criterion 6a (plain filter mostly silent)", bc_zero_frac > 0.5, buf, elapsed);
  std::snprintf(buf, sizeof(buf), "modal rejection count %d", mode);
  report("criterion 6b (post-hoc modal count in {3,4})", mode == 3 || mode == 4, buf, 0.0);
  std::snprintf(buf, sizeof(buf), "power %.3f (post-hoc) vs %.3f (plain), gap %.3f",
                ph_power, bc_power, ph_power - bc_power);
  report("criterion 6c (power gap >= 0.3)", ph_power - bc_power >= 0.3, buf, 0.0);
}

void criterion7() {
  double t0 = now_ms();
  phk::Scenario sc;
  sc.n = 250;
  sc.p = 50;
  sc.p_relevant = 0;
  sc.alpha_kn = 0.2;
  sc.k = 5;
  sc.nu = 1;
  sc.reps = 2000;
  sc.base_seed = 71;

  std::vector<double> sup_values(sc.reps, 0.0);
  phk::RunOptions opt;
  opt.observer = [&](const phk::RepArtifacts& art) {
    // global null: every rejection is a false discovery
    Rational sup;
    auto grid = phk::rwc_posthoc_eta(art.runs, *sc.nu);
    for (std::size_t r = 0; r < grid.size(); ++r) {
      Rational value =
          Rational(static_cast<std::int64_t>(grid[r].second.rejections.size()) *
                       static_cast<std::int64_t>(r + 1),
                   sc.k);
      if (phk::cmp(value, sup) > 0) sup = value;
    }
    sup_values[art.rep_id] = sup.to_double();
  };
  auto records = phk::run_scenario(sc, {Method::rwc}, opt);
  int failed = 0;
  for (const auto& r : records)
    if (r.failed) ++failed;

  auto ms = mean_se(sup_values);
  double elapsed = now_ms() - t0;
  std::snprintf(buf, sizeof(buf),
                "mean sup NFD*eta = %.4f, bound nu + 3SE = %.4f (%d failed reps)",
                ms.mean, 1.0 + 3.0 * ms.se, failed);
  report("criterion 7 (PFER post-hoc guarantee)",
         failed == 0 && ms.mean <= 1.0 + 3.0 * ms.se, buf, elapsed);
}

void criterion8() {
  double t0 = now_ms();
  std::mt19937_64 rng(0xC8);
  std::uniform_int_distribution<std::int64_t> num_gen(0, 32);
  std::uniform_int_distribution<std::int64_t> den_gen(1, 8);
  std::uniform_real_distribution<double> alpha_gen(0.05, 1.0);
  int violations = 0;
  const int cases = 500;
  for (int it = 0; it < cases; ++it) {
    int p = 2 + static_cast<int>(rng() % 7);
    std::vector<Rational> e;
    for (int i = 0; i < p; ++i) e.emplace_back(num_gen(rng), den_gen(rng));
    double alpha = alpha_gen(rng);
    auto rep = phk::ebh(phk::evalue_vector_from(e), alpha);
    auto members = oracle::max_closure_members(p, alpha, [&](const std::vector<int>& S) {
      Rational sum;
      for (int i : S) sum += e[i];
      return sum / p;
    });
    if (members.size() != 1 || members[0] != rep.rejections) ++violations;
  }
  double elapsed = now_ms() - t0;
  std::snprintf(buf, sizeof(buf), "%d cases, %d violations", cases, violations);
  report("criterion 8 (e-BH equals closure maximum)",
         violations == 0 && elapsed < 30000.0, buf, elapsed);
}

void criterion9() {
  double t0 = now_ms();
  std::mt19937_64 rng(0xC9);
  std::uniform_real_distribution<double> alpha_gen(0.1, 1.0);
  int dominance_violations = 0, cardinality_violations = 0;
  const int cases = 200;
  for (int it = 0; it < cases; ++it) {
    int p = 2 + static_cast<int>(rng() % 9);
    std::vector<std::vector<std::uint8_t>> pos(2, std::vector<std::uint8_t>(p, 0));
    std::vector<std::vector<std::uint8_t>> neg(2, std::vector<std::uint8_t>(p, 0));
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < p; ++i) {
        switch (rng() % 3) {
          case 0: pos[j][i] = 1; break;
          case 1: neg[j][i] = 1; break;
          default: break;
        }
      }
    auto improved = phk::make_improved_family_from_patterns(pos, neg);
    std::vector<phk::RunEValues> evs(2);
    for (int j = 0; j < 2; ++j) {
      int m = 0;
      for (int i = 0; i < p; ++i) m += neg[j][i];
      for (int i = 0; i < p; ++i)
        evs[j].e.push_back(pos[j][i] ? Rational(p, 1 + m) : Rational());
    }
    auto ev = phk::average_evalues(evs);
    auto averaged = phk::make_averaged_family(ev);
    for (std::uint32_t mask = 0; mask < (1u << p); ++mask) {
      auto S = oracle::mask_to_set(mask);
      if (phk::cmp(phk::local_evalue(improved, S), phk::local_evalue(averaged, S)) < 0)
        ++dominance_violations;
    }
    double alpha = alpha_gen(rng);
    auto search = phk::closed_search_from_family(improved, alpha, true);
    auto rb = phk::ebh(ev, alpha);
    if (search.rejections.size() < rb.rejections.size()) ++cardinality_violations;
  }
  double elapsed = now_ms() - t0;
  std::snprintf(buf, sizeof(buf), "%d patterns, %d dominance / %d cardinality violations",
                cases, dominance_violations, cardinality_violations);
  report("criterion 9 (uniform improvement)",
         dominance_violations == 0 && cardinality_violations == 0, buf, elapsed);
}

void scaled_grid_point() {
  double t0 = now_ms();
  phk::Scenario sc;
  sc.n = 1000;
  sc.p = 200;
  sc.p_relevant = 20;
  sc.amplitude = 8.0;
  sc.alpha_kn = 0.2;
  sc.alpha_ebh = 0.2;
  sc.k = 1;
  sc.reps = 100;
  sc.base_seed = 100;

  int dominance_violations = 0, unification_violations = 0;
  std::vector<std::pair<long, long>> signs(sc.reps);
  phk::RunOptions opt;
  opt.observer = [&](const phk::RepArtifacts& art) {
    const auto& w = art.runs.front();
    auto bc = phk::filter_bc(w, sc.alpha_kn);
    auto ph = phk::filter_ph(w, sc.alpha_kn);
    auto dph = phk::filter_dph({w}, sc.alpha_kn, sc.alpha_ebh);
    if (!std::includes(ph.rejections.begin(), ph.rejections.end(),
                       bc.rejections.begin(), bc.rejections.end()))
      ++dominance_violations;
    if (dph.rejections != ph.rejections || dph.alpha_or_eta != ph.alpha)
      ++unification_violations;
  };
  auto records = phk::run_scenario(sc, {Method::bc, Method::ph, Method::dph}, opt);

  std::vector<double> ratios;
  int failed = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++failed;
      continue;
    }
    if (r.method == Method::ph) ratios.push_back(r.fdp / r.alpha);
  }
  auto ms = mean_se(ratios);
  double elapsed = now_ms() - t0;
  std::snprintf(
      buf, sizeof(buf),
      "p=200 sweep: %d failed reps, %d dominance / %d unification violations, "
      "mean FDP/alpha %.3f vs bound %.3f",
      failed, dominance_violations, unification_violations, ms.mean,
      1.0 + 3.0 * ms.se);
  report("scaled grid point (end-to-end)",
         failed == 0 && dominance_violations == 0 && unification_violations == 0 &&
             ms.mean <= 1.0 + 3.0 * ms.se,
         buf, elapsed);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criteria4and5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  scaled_grid_point();
  std::printf("%d criterion check(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
