#include <doctest.h>

#include <cmath>
#include <set>

#include "riplab/potential.hpp"
#include "riplab/simulator.hpp"
#include "support.hpp"

using namespace riplab;

namespace {

struct Setup {
  SiteKernel kernel;
  SparseGenerator gen;
};

Setup make(const std::vector<std::vector<double>>& r, Occupation n, double d) {
  auto k = fixtures::kernel(r);
  auto g = build_generator(k, build_weights(n, d), ConfigSpace(n, r.size()));
  return {std::move(k), std::move(g)};
}

}  // namespace

TEST_CASE("single exponential jump") {
  const auto s = make(fixtures::two_site(), 1, 0.5);
  const auto& sp = s.gen.space();
  const auto sum = simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(1)}, 10000, 42);
  CHECK(sum.hitting_times.size() == 10000);
  CHECK(std::abs(sum.mean_hitting_time() - 2.0) <= 3.0 * sum.standard_error());
  for (double t : sum.hitting_times) CHECK((t > 0.0 && std::isfinite(t)));
  for (auto e : sum.events) CHECK(e == 1);
}

TEST_CASE("same seed gives the same samples regardless of worker count") {
  const auto s = make(fixtures::chain3(), 20, 0.3);
  const auto& sp = s.gen.space();
  SimulationOptions one, many;
  many.workers = 4;
  const auto a = simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 200, 9, one);
  const auto b = simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 200, 9, many);
  CHECK(a.hitting_times == b.hitting_times);
  CHECK(a.events == b.events);
  const auto c = simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 200, 10, one);
  CHECK(a.hitting_times != c.hitting_times);
}

TEST_CASE("Monte Carlo agrees with the exact solve on the three-site chain") {
  const Occupation n = 40;
  const auto s = make(fixtures::chain3(), n, inverse_log_squared(n));
  const auto& sp = s.gen.space();
  const double exact = mean_hitting_time(s.gen, sp.condensate(0), {sp.condensate(2)});
  SimulationOptions opts;
  opts.workers = 4;
  const auto sum = simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 2000, 77, opts);
  CHECK(std::abs(sum.mean_hitting_time() - exact) <= 3.0 * sum.standard_error());
}

TEST_CASE("property: long-run occupation matches μ") {
  // Batch means over independent runs; each run starts from a fixed state and
  // is long compared with the mixing time of the 10-state space.
  const auto s = make(fixtures::complete3(), 3, 0.5);
  const std::size_t runs = 300;
  const double horizon = 400.0;
  std::vector<double> mean(s.gen.size(), 0.0), sq(s.gen.size(), 0.0);
  for (std::size_t k = 0; k < runs; ++k) {
    const auto occ = simulate_occupation(s.gen, 0, horizon, 1000 + k);
    double total = 0.0;
    for (double v : occ) total += v;
    CHECK(total == doctest::Approx(horizon).epsilon(1e-12));
    for (Index i = 0; i < s.gen.size(); ++i) {
      const double f = occ[i] / horizon;
      mean[i] += f / runs;
      sq[i] += f * f / runs;
    }
  }
  for (Index i = 0; i < s.gen.size(); ++i) {
    const double se = std::sqrt((sq[i] - mean[i] * mean[i]) / (runs - 1));
    CHECK(std::abs(mean[i] - std::exp(s.gen.log_mu()[i])) <= 4.0 * se);
  }
}

TEST_CASE("condensate path bookkeeping") {
  const Occupation n = 50;
  const double d = inverse_log_squared(n);
  const auto s = make(fixtures::two_site(), n, d);
  const auto sum = simulate_condensate_path(s.gen, s.kernel, 0, 10.0, 1.0 / d, 5, 20);
  CHECK(sum.trace_time.size() == 20);
  for (std::size_t t = 0; t < 20; ++t) CHECK(sum.trace_time[t] == doctest::Approx(10.0 / d).epsilon(1e-12));
  Site last = 0;
  std::size_t trial = 0;
  for (const auto& j : sum.condensate_jumps) {
    if (j.trial != trial) {
      trial = j.trial;
      last = 0;
    }
    CHECK(s.kernel.in_s_star(j.from));
    CHECK(s.kernel.in_s_star(j.to));
    CHECK(j.from == last);
    CHECK(j.to != j.from);
    CHECK((j.time > 0.0 && j.time <= 10.0));
    last = j.to;
  }
  CHECK_ERRC(simulate_condensate_path(s.gen, s.kernel, 0, 0.0, 1.0, 5), Errc::BadParameter);
}

TEST_CASE("condensate jump rate on two symmetric sites") {
  // At d = 1e-3 the trace rate d⁻¹ r_N(1→2) is within a percent of r(1,2) = 1.
  const Occupation n = 50;
  const double d = 1e-3;
  const auto s = make(fixtures::two_site(), n, d);
  const auto& sp = s.gen.space();
  const double exact = trace_rates(s.gen, {sp.condensate(0), sp.condensate(1)})[0][1] / d;
  CHECK(std::abs(exact - 1.0) <= 0.01);

  SimulationOptions opts;
  opts.workers = 4;
  const double horizon = 10.0;
  const std::size_t trials = 200;
  const auto sum = simulate_condensate_path(s.gen, s.kernel, 0, horizon, 1.0 / d, 31, trials, opts);
  const double jumps = static_cast<double>(sum.condensate_jumps.size());
  const double rate = jumps / (horizon * trials);
  const double se = std::sqrt(jumps) / (horizon * trials);
  CHECK(std::abs(rate - exact) <= 3.0 * se);
  CHECK(std::abs(rate - 1.0) <= 3.0 * se + 0.01);
}

namespace {

std::vector<double> first_scale_delta_fractions() {
  std::vector<double> out;
  for (Occupation n : {50u, 100u, 200u}) {
    const double d = inverse_log_squared(n);
    const auto s = make(fixtures::two_site(), n, d);
    SimulationOptions opts;
    opts.workers = 4;
    const auto sum = simulate_condensate_path(s.gen, s.kernel, 0, 10.0, 1.0 / d, 3, 200, opts);
    for (std::size_t t = 0; t < sum.trials; ++t) {
      CHECK(sum.delta_time[t] >= 0.0);
      CHECK(sum.trace_time[t] + sum.delta_time[t] > sum.trace_time[t]);
    }
    out.push_back(sum.delta_fraction());
  }
  return out;
}

}  // namespace

TEST_CASE("Δ-time fraction decreases in N on the first time-scale") {
  const auto f = first_scale_delta_fractions();
  CAPTURE(f[0]);
  CAPTURE(f[2]);
  CHECK(f[1] < f[0]);
  CHECK(f[2] < f[1]);
}

TEST_CASE("finite-N limit: Δ-time fraction below 5% on the first time-scale") {
  for (double fraction : first_scale_delta_fractions()) {
    CAPTURE(fraction);
    CHECK(fraction < 0.05);
  }
}

TEST_CASE("three-site chain condensate alternates between the ends") {
  const Occupation n = 30;
  const double d = inverse_log_squared(n);
  const auto s = make(fixtures::chain3(), n, d);
  const auto sum = simulate_condensate_path(s.gen, s.kernel, 0, 5.0, n / (d * d), 2024, 20);
  std::set<std::pair<Site, Site>> moves;
  for (const auto& j : sum.condensate_jumps) moves.insert({j.from, j.to});
  for (const auto& m : moves) CHECK(((m.first == 0 && m.second == 2) || (m.first == 2 && m.second == 0)));
  CHECK(!sum.condensate_jumps.empty());
}

TEST_CASE("simulation errors") {
  const auto s = make(fixtures::chain3(), 10, 0.1);
  const auto& sp = s.gen.space();
  CHECK_ERRC(simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(0)}, 5, 1), Errc::BadSets);
  CHECK_ERRC(simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 0, 1), Errc::BadParameter);
  SimulationOptions capped;
  capped.event_cap = 3;
  CHECK_ERRC(simulate_hitting(s.gen, sp.condensate(0), {sp.condensate(2)}, 5, 1, capped), Errc::HorizonExceeded);
  CHECK_ERRC(simulate_condensate_path(s.gen, s.kernel, 1, 1.0, 1.0, 1), Errc::BadParameter);
}
