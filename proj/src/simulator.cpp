#include "riplab/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "riplab/error.hpp"

namespace riplab {

namespace {

// Uniform on (0, 1].
inline double open_uniform(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double holding_time(std::mt19937_64& rng, double exit_rate) {
  return -std::log(open_uniform(rng)) / exit_rate;
}

inline Index next_state(const SparseGenerator& gen, Index i, std::mt19937_64& rng) {
  const std::size_t first = gen.first_edge(i), last = gen.last_edge(i);
  const auto rates = gen.rates();
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * gen.exit_rates()[i];
  for (std::size_t e = first; e + 1 < last; ++e) {
    u -= rates[e];
    if (u < 0.0) return gen.targets()[e];
  }
  return gen.targets()[last - 1];
}

// Runs body(trial) for every trial over the worker pool; the first error is
// rethrown after all workers stop.
template <class Body>
void for_trials(std::size_t trials, unsigned workers, Body body) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t t = next++; t < trials; t = next++) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_lock);
          if (!failure) failure = std::current_exception();
          next = trials;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

[[noreturn]] void cap_reached(std::uint64_t cap) {
  throw Error(Errc::HorizonExceeded, "trial reached the event cap of " + std::to_string(cap));
}

}  // namespace

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

double TrajectorySummary::mean_hitting_time() const {
  if (hitting_times.empty()) return 0.0;
  return std::accumulate(hitting_times.begin(), hitting_times.end(), 0.0) / hitting_times.size();
}

double TrajectorySummary::standard_error() const {
  const std::size_t n = hitting_times.size();
  if (n < 2) return 0.0;
  const double mean = mean_hitting_time();
  double ss = 0.0;
  for (double t : hitting_times) ss += (t - mean) * (t - mean);
  return std::sqrt(ss / (n - 1) / n);
}

double TrajectorySummary::delta_fraction() const {
  const double trace = std::accumulate(trace_time.begin(), trace_time.end(), 0.0);
  const double delta = std::accumulate(delta_time.begin(), delta_time.end(), 0.0);
  return trace + delta > 0.0 ? delta / (trace + delta) : 0.0;
}

TrajectorySummary simulate_hitting(const SparseGenerator& gen, Index start, const std::vector<Index>& b,
                                   std::size_t trials, std::uint64_t seed,
                                   const SimulationOptions& options) {
  if (trials == 0) throw Error(Errc::BadParameter, "trials must be at least 1");
  if (start >= gen.size()) throw Error(Errc::BadSets, "start rank outside E_N");
  std::vector<std::uint8_t> target(gen.size(), 0);
  for (Index i : b) {
    if (i >= gen.size()) throw Error(Errc::BadSets, "target rank outside E_N");
    target[i] = 1;
  }
  if (target[start]) throw Error(Errc::BadSets, "start lies in the target set");

  const auto wall = std::chrono::steady_clock::now();
  TrajectorySummary out;
  out.seed = seed;
  out.trials = trials;
  out.hitting_times.assign(trials, 0.0);
  out.events.assign(trials, 0);
  const auto exit = gen.exit_rates();

  for_trials(trials, options.workers, [&](std::size_t trial) {
    auto rng = trial_engine(seed, trial);
    Index state = start;
    double clock = 0.0;
    std::uint64_t events = 0;
    while (!target[state]) {
      if (events == options.event_cap) cap_reached(options.event_cap);
      clock += holding_time(rng, exit[state]);
      state = next_state(gen, state, rng);
      ++events;
    }
    out.hitting_times[trial] = clock;
    out.events[trial] = events;
  });
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
  return out;
}

TrajectorySummary simulate_condensate_path(const SparseGenerator& gen, const SiteKernel& kernel,
                                           Site start_site, double horizon, double theta,
                                           std::uint64_t seed, std::size_t trials,
                                           const SimulationOptions& options) {
  if (!kernel.in_s_star(start_site)) throw Error(Errc::BadParameter, "start site is not in S*");
  if (!(theta > 0.0) || !(horizon > 0.0))
    throw Error(Errc::BadParameter, "horizon and timescale must be positive");
  if (trials == 0) throw Error(Errc::BadParameter, "trials must be at least 1");
  if (gen.space().sites() != kernel.size()) throw Error(Errc::BadInput, "kernel and generator disagree");

  // Site of S* whose condensate sits at each rank, or kappa when in Δ.
  const Site none = kernel.size();
  std::vector<std::pair<Index, Site>> condensates;
  for (Site x : kernel.s_star()) condensates.emplace_back(gen.space().condensate(x), x);
  auto site_at = [&](Index i) {
    for (const auto& [rank, x] : condensates)
      if (rank == i) return x;
    return none;
  };

  const auto wall = std::chrono::steady_clock::now();
  TrajectorySummary out;
  out.seed = seed;
  out.trials = trials;
  out.events.assign(trials, 0);
  out.trace_time.assign(trials, 0.0);
  out.delta_time.assign(trials, 0.0);
  std::vector<std::vector<CondensateJump>> jumps(trials);
  const auto exit = gen.exit_rates();
  const double limit = horizon * theta;

  for_trials(trials, options.workers, [&](std::size_t trial) {
    auto rng = trial_engine(seed, trial);
    Index state = gen.space().condensate(start_site);
    Site label = start_site;
    double trace = 0.0, delta = 0.0;
    std::uint64_t events = 0;
    while (true) {
      const double hold = holding_time(rng, exit[state]);
      const Site here = site_at(state);
      if (here != none) {
        if (here != label) {
          jumps[trial].push_back({trial, label, here, trace / theta});
          label = here;
        }
        if (trace + hold >= limit) {
          trace = limit;
          break;
        }
        trace += hold;
      } else {
        delta += hold;
      }
      if (events == options.event_cap) cap_reached(options.event_cap);
      state = next_state(gen, state, rng);
      ++events;
    }
    out.trace_time[trial] = trace;
    out.delta_time[trial] = delta;
    out.events[trial] = events;
  });
  for (auto& j : jumps) out.condensate_jumps.insert(out.condensate_jumps.end(), j.begin(), j.end());
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count();
  return out;
}

std::vector<double> simulate_occupation(const SparseGenerator& gen, Index start, double horizon,
                                        std::uint64_t seed, const SimulationOptions& options) {
  if (start >= gen.size()) throw Error(Errc::BadSets, "start rank outside E_N");
  if (!(horizon > 0.0)) throw Error(Errc::BadParameter, "horizon must be positive");
  std::vector<double> time(gen.size(), 0.0);
  auto rng = trial_engine(seed, 0);
  const auto exit = gen.exit_rates();
  Index state = start;
  double clock = 0.0;
  std::uint64_t events = 0;
  while (true) {
    const double hold = holding_time(rng, exit[state]);
    if (clock + hold >= horizon) {
      time[state] += horizon - clock;
      break;
    }
    time[state] += hold;
    clock += hold;
    if (++events == options.event_cap) cap_reached(options.event_cap);
    state = next_state(gen, state, rng);
  }
  return time;
}

}  // namespace riplab
