// Acceptance checks for the bundled benchmark suite.
//
// Runs the full suite in-process (4 maps x 4 algorithms x n in {5,10,15,20}
// x 25 seeded instances) and verifies the navigation stack's advertised
// properties, printing exactly one PASS/FAIL line per criterion. The process
// exits with the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "unav/grid_map.hpp"
#include "unav/sim.hpp"

namespace fs = std::filesystem;
using namespace unav;

namespace {

constexpr double kTol = 1e-9;
constexpr std::uint32_t kSuiteSeed = 1;
constexpr int kInstances = 25;
constexpr int kPairs = 20;

const std::vector<std::string> kMapNames = {"empty16", "random32", "maze32", "rooms32"};
const std::vector<Algorithm> kAlgos = {Algorithm::kDecUnav, Algorithm::kCUnav, Algorithm::kOrca,
                                       Algorithm::kTswap};
const std::vector<int> kCounts = {5, 10, 15, 20};

enum AlgoIdx { kDec = 0, kCen = 1, kOrc = 2, kTsw = 3 };

struct Suite {
  // results[map][algo][n_idx][instance]
  std::vector<std::vector<std::vector<std::vector<RunResult>>>> results;
  double elapsed_seconds = 0.0;
};

Suite run_suite() {
  Suite suite;
  auto t0 = std::chrono::steady_clock::now();
  suite.results.resize(kMapNames.size());
  for (std::size_t m = 0; m < kMapNames.size(); ++m) {
    std::string path = std::string(UNAV_DATA_DIR) + "/maps/" + kMapNames[m] + ".map";
    GridMap map = load_map_file(path);
    auto instances = generate_instances(map, path, kInstances, kPairs,
                                        kSuiteSeed + 1000u * static_cast<std::uint32_t>(m));
    suite.results[m].resize(kAlgos.size());
    for (std::size_t a = 0; a < kAlgos.size(); ++a) {
      suite.results[m][a].resize(kCounts.size());
      for (std::size_t c = 0; c < kCounts.size(); ++c) {
        suite.results[m][a][c].reserve(kInstances);
        for (int k = 0; k < kInstances; ++k) {
          ScenarioInstance inst = instances[k];
          inst.starts.resize(kCounts[c]);
          inst.goals.resize(kCounts[c]);
          RunConfig cfg;
          cfg.algorithm = kAlgos[a];
          suite.results[m][a][c].push_back(run(map, inst, cfg));
        }
      }
    }
  }
  suite.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return suite;
}

bool criterion1(const Suite& s) {
  const RunConfig defaults;
  int bad = 0;
  double worst_pair = kInf, worst_clear = kInf;
  for (const auto& per_map : s.results)
    for (const auto& per_algo : per_map)
      for (const auto& per_n : per_algo)
        for (const RunResult& r : per_n) {
          if (r.outcome != Outcome::kSuccess) continue;
          worst_pair = std::min(worst_pair, r.min_pair_dist);
          worst_clear = std::min(worst_clear, r.min_obstacle_clearance);
          if (r.min_pair_dist < 2.0 * defaults.r_phys - kTol ||
              r.min_obstacle_clearance < defaults.r_phys - kTol) {
            ++bad;
          }
        }
  bool time_ok = s.elapsed_seconds < 1800.0;
  bool ok = bad == 0 && time_ok;
  std::printf(
      "C1 safety (successful runs: pair dist >= 0.6, obstacle clearance >= 0.3, tol 1e-9; "
      "suite < 30 min): %s (worst pair %.6f, worst clearance %.6f, %.1f s)\n",
      ok ? "PASS" : "FAIL", worst_pair, worst_clear, s.elapsed_seconds);
  return ok;
}

bool criterion2(const Suite& s) {
  int bad = 0, total = 0;
  for (const auto& per_map : s.results)
    for (const auto& per_n : per_map[kDec])
      for (const RunResult& r : per_n) {
        if (r.outcome != Outcome::kSuccess) continue;
        ++total;
        // A settle time t* exists iff the final assignment is a bijection and
        // the last step at which it was not one precedes the end of the run.
        if (!r.assignment_consistent_at_end || r.last_inconsistent_step >= r.steps) ++bad;
      }
  bool ok = bad == 0;
  std::printf(
      "C2 settled bijection (every successful decentralized run ends with a consistent "
      "agent-to-goal bijection reached before the final step): %s (%d/%d runs)\n",
      ok ? "PASS" : "FAIL", total - bad, total);
  return ok;
}

bool criterion3(const Suite& s) {
  int gr_bad = 0, swap_bad = 0, bij_bad = 0, sum_bad = 0;
  for (std::size_t m = 0; m < s.results.size(); ++m) {
    for (const auto& per_n : s.results[m][kDec])
      for (const RunResult& r : per_n) {
        if (!r.gr_monotone) ++gr_bad;
        swap_bad += r.swap_violations;
      }
    for (const auto& per_n : s.results[m][kCen])
      for (const RunResult& r : per_n) {
        if (r.outcome != Outcome::kFailNoGoal && !r.assignment_consistent_at_end) ++bij_bad;
        if (kMapNames[m] == "empty16") {
          for (std::size_t k = 0; k + 1 < r.exchange_sums.size(); k += 2) {
            if (r.exchange_sums[k + 1] > r.exchange_sums[k] + kTol) ++sum_bad;
          }
        }
      }
  }
  bool ok = gr_bad == 0 && swap_bad == 0 && bij_bad == 0 && sum_bad == 0;
  std::printf(
      "C3 monotonicity (reached flags never revert; every accepted swap shrinks the pair's "
      "summed path length; centralized exchange keeps a bijection and never raises the total "
      "remaining path length at an exchange event on the empty map, tol 1e-9): %s "
      "(gr %d, swap %d, bijection %d, sums %d violations)\n",
      ok ? "PASS" : "FAIL", gr_bad, swap_bad, bij_bad, sum_bad);
  return ok;
}

int successes(const Suite& s, std::size_t m, int algo, std::size_t c) {
  int cnt = 0;
  for (const RunResult& r : s.results[m][algo][c])
    if (r.outcome == Outcome::kSuccess) ++cnt;
  return cnt;
}

bool criterion4(const Suite& s) {
  bool ok = true;
  std::string detail;
  for (std::size_t m = 0; m < kMapNames.size(); ++m)
    for (std::size_t c = 0; c < kCounts.size(); ++c) {
      int dec = successes(s, m, kDec, c);
      int orc = successes(s, m, kOrc, c);
      bool strict = kMapNames[m] == "rooms32" && kCounts[c] >= 10;
      if (dec < orc || (strict && dec <= orc)) {
        ok = false;
        detail += " " + kMapNames[m] + "/n" + std::to_string(kCounts[c]) + ":" +
                  std::to_string(dec) + "v" + std::to_string(orc);
      }
    }
  std::printf(
      "C4 exchange beats no-exchange (success rate >= on every map and count; strictly "
      "greater on rooms32 at n >= 10): %s%s\n",
      ok ? "PASS" : "FAIL", detail.c_str());
  return ok;
}

bool criterion5(const Suite& s) {
  int solved = 0, total = 0;
  for (std::size_t m = 0; m < kMapNames.size(); ++m)
    for (std::size_t c = 0; c < kCounts.size(); ++c) {
      solved += successes(s, m, kTsw, c);
      total += kInstances;
    }
  bool ok = solved == total;
  std::printf("C5 discrete solver completeness (solves every suite instance in its step limit): "
              "%s (%d/%d)\n",
              ok ? "PASS" : "FAIL", solved, total);
  return ok;
}

bool all_solved(const Suite& s, std::size_t m, std::size_t c, int k) {
  for (std::size_t a = 0; a < kAlgos.size(); ++a)
    if (s.results[m][a][c][k].outcome != Outcome::kSuccess) return false;
  return true;
}

bool criterion6(const Suite& s) {
  double tsw = 0.0, dec = 0.0;
  for (std::size_t m = 0; m < kMapNames.size(); ++m) {
    if (kMapNames[m] != "empty16" && kMapNames[m] != "random32") continue;
    for (std::size_t c = 0; c < kCounts.size(); ++c)
      for (int k = 0; k < kInstances; ++k) {
        if (!all_solved(s, m, c, k)) continue;
        tsw += s.results[m][kTsw][c][k].sumdist;
        dec += s.results[m][kDec][c][k].sumdist;
      }
  }
  double ratio = dec > 0.0 ? tsw / dec : 0.0;
  bool ok = ratio >= 1.2;
  std::printf(
      "C6 grid-solver distance overhead (total distance of the discrete solver >= 1.2x the "
      "decentralized solver on empty16+random32, commonly solved): %s (ratio %.3f)\n",
      ok ? "PASS" : "FAIL", ratio);
  return ok;
}

bool criterion7(const Suite& s) {
  double cen = 0.0, dec = 0.0;
  for (std::size_t m = 0; m < kMapNames.size(); ++m)
    for (std::size_t c = 0; c < kCounts.size(); ++c)
      for (int k = 0; k < kInstances; ++k) {
        if (!all_solved(s, m, c, k)) continue;
        cen += s.results[m][kCen][c][k].sumdist;
        dec += s.results[m][kDec][c][k].sumdist;
      }
  double ratio = dec > 0.0 ? cen / dec : kInf;
  bool ok = ratio <= 1.05;
  std::printf(
      "C7 centralized advantage (total distance of the centralized solver <= 1.05x the "
      "decentralized solver, commonly solved): %s (ratio %.3f)\n",
      ok ? "PASS" : "FAIL", ratio);
  return ok;
}

// Runs one unit-test case by exact name and requires it to pass.
bool oracle_case(const std::string& name, const fs::path& log_dir, int idx) {
  fs::path log = log_dir / ("oracle_" + std::to_string(idx) + ".log");
  std::string cmd = std::string("\"") + UNAV_UNIT_TESTS_PATH + "\" -tc=\"" + name + "\" > \"" +
                    log.string() + "\" 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc != 0) return false;
  std::ifstream in(log);
  std::stringstream buf;
  buf << in.rdbuf();
  // Guards against the filter silently matching nothing.
  return buf.str().find("1 passed") != std::string::npos;
}

bool criterion8(const fs::path& tmp) {
  bool theta = oracle_case("planner path lengths within 1% of the visibility-graph oracle", tmp, 0);
  bool orca = oracle_case("velocity solver matches the brute-force projection oracle", tmp, 1);
  bool goal = oracle_case("goal reconciliation matches the reference interpreter on random states",
                          tmp, 2);
  bool ok = theta && orca && goal;
  std::printf(
      "C8 oracle equivalence (planner within 1%% of visibility-graph lengths; velocity solver "
      "within 1e-6 of brute-force projection; goal reconciliation equals the reference "
      "interpreter): %s (planner %s, velocity %s, reconciliation %s)\n",
      ok ? "PASS" : "FAIL", theta ? "ok" : "bad", orca ? "ok" : "bad", goal ? "ok" : "bad");
  return ok;
}

int shell(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion9(const fs::path& tmp) {
  std::string cli = std::string("\"") + UNAV_CLI_PATH + "\"";
  std::string data = UNAV_DATA_DIR;
  fs::path scen = tmp / "scen";
  std::string quiet = " > /dev/null 2>&1";

  bool ok = true;
  shell(cli + " gen --map \"" + data + "/maps/rooms32.map\" --count 1 --pairs 8 --seed 424 --out \"" +
        scen.string() + "\"" + quiet);
  std::string inst = (scen / "instance_000.json").string();
  int rc1 = shell(cli + " run --scen \"" + inst + "\" --algo dec-unav --out \"" +
                  (tmp / "r1.json").string() + "\" --trace \"" + (tmp / "t1.csv").string() + "\"" +
                  quiet);
  int rc2 = shell(cli + " run --scen \"" + inst + "\" --algo dec-unav --out \"" +
                  (tmp / "r2.json").string() + "\" --trace \"" + (tmp / "t2.csv").string() + "\"" +
                  quiet);
  std::string r1 = slurp(tmp / "r1.json");
  if (rc1 != rc2 || r1.empty() || r1 != slurp(tmp / "r2.json") ||
      slurp(tmp / "t1.csv") != slurp(tmp / "t2.csv")) {
    ok = false;
  }

  {
    std::ofstream spec(tmp / "bench.json");
    spec << "{\"maps\": [\"" << data << "/maps/empty16.map\"],\n"
         << " \"algorithms\": [\"dec-unav\", \"tswap\"],\n"
         << " \"agent_counts\": [5, 10], \"instances\": 5, \"seed\": 7}\n";
  }
  std::string bench = cli + " bench --spec \"" + (tmp / "bench.json").string() + "\"";
  int rb1 = shell(bench + " --jobs 1 --out \"" + (tmp / "b1.csv").string() + "\" --summary \"" +
                  (tmp / "s1.csv").string() + "\"" + quiet);
  int rb2 = shell(bench + " --jobs 8 --out \"" + (tmp / "b8.csv").string() + "\" --summary \"" +
                  (tmp / "s8.csv").string() + "\"" + quiet);
  std::string b1 = slurp(tmp / "b1.csv");
  if (rb1 != 0 || rb2 != 0 || b1.empty() || b1 != slurp(tmp / "b8.csv") ||
      slurp(tmp / "s1.csv") != slurp(tmp / "s8.csv")) {
    ok = false;
  }

  std::printf(
      "C9 determinism (repeated runs byte-identical; bench with --jobs 1 and --jobs 8 produce "
      "identical CSVs): %s\n",
      ok ? "PASS" : "FAIL");
  return ok;
}

}  // namespace

int main() {
  fs::path tmp = fs::temp_directory_path() / "unav_acceptance";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  std::printf("running benchmark suite (4 maps x 4 algorithms x {5,10,15,20} agents x %d "
              "instances, seed %u)...\n",
              kInstances, kSuiteSeed);
  std::fflush(stdout);
  Suite suite = run_suite();

  int failures = 0;
  failures += !criterion1(suite);
  failures += !criterion2(suite);
  failures += !criterion3(suite);
  failures += !criterion4(suite);
  failures += !criterion5(suite);
  failures += !criterion6(suite);
  failures += !criterion7(suite);
  failures += !criterion8(tmp);
  failures += !criterion9(tmp);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
