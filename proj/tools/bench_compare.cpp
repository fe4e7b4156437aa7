// Timing comparison between the serial reference paths and the OpenMP
// kernels: the replication sweep, the closure-set search, and the exhaustive
// membership scan.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "phk/evalues.hpp"
#include "phk/simulate.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn) {
  auto t0 = clock_type::now();
  fn();
  auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.1f ms   parallel %9.1f ms   speedup %.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

// Mostly-positive statistics keep most candidate sets inside the closure
// set, so the scans do full work instead of exiting early.
std::vector<phk::WStatistics> dense_runs(int p, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.5, 4.0);
  std::vector<phk::WStatistics> runs;
  for (int j = 0; j < k; ++j) {
    phk::WStatistics ws;
    ws.run_id = j;
    for (int i = 0; i < p; ++i) {
      double sign = (rng() % 6 == 0) ? -1.0 : 1.0;
      ws.w.push_back(sign * mag(rng));
    }
    runs.push_back(ws);
  }
  return runs;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP max threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("Built without OpenMP; both columns run serially.\n\n");
#endif

  {
    phk::Scenario sc;
    sc.n = 150;
    sc.p = 30;
    sc.p_relevant = 3;
    sc.amplitude = 6.0;
    sc.reps = 24;
    sc.base_seed = 7;
    std::vector<phk::Method> methods{phk::Method::bc, phk::Method::ph};
    std::vector<phk::MetricsRecord> serial_out, parallel_out;
    double ts = time_ms([&] { serial_out = phk::run_scenario_serial(sc, methods); });
    double tp = time_ms([&] { parallel_out = phk::run_scenario(sc, methods); });
    report("replication sweep", ts, tp);
    bool same = serial_out.size() == parallel_out.size();
    for (std::size_t i = 0; same && i < serial_out.size(); ++i)
      same = serial_out[i].fdp == parallel_out[i].fdp &&
             serial_out[i].alpha == parallel_out[i].alpha;
    std::printf("  outputs identical: %s\n", same ? "yes" : "NO");
  }

  {
    std::mt19937_64 rng(11);
    auto runs = dense_runs(12, 3, rng);
    phk::RejectionReport rs, rp;
    double ts = time_ms([&] { rs = phk::closed_knockoff_search_serial(runs, 0.5, 0.5); });
    double tp = time_ms([&] { rp = phk::closed_knockoff_search(runs, 0.5, 0.5); });
    report("closure search (p=12)", ts, tp);
    std::printf("  outputs identical: %s\n",
                rs.rejections == rp.rejections ? "yes" : "NO");
  }

  {
    std::mt19937_64 rng(13);
    auto runs = dense_runs(20, 4, rng);
    auto fam = phk::make_improved_family(runs, 0.5);
    std::vector<int> all(20);
    for (int i = 0; i < 20; ++i) all[i] = i;
    bool ms = false, mp = false;
    double ts = time_ms([&] { ms = phk::closure_membership_serial(all, 0.9, fam); });
    double tp = time_ms([&] { mp = phk::closure_membership(all, 0.9, fam); });
    report("membership scan (p=20)", ts, tp);
    std::printf("  outputs identical: %s\n", ms == mp ? "yes" : "NO");
  }

  return 0;
}
