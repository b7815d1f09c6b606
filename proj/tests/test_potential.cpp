#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "riplab/potential.hpp"
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

// Trace-process rate from E^x to E^y: exit rate of E^x times the probability
// that the first return to E* lands in E^y, from dense hitting probabilities.
double trace_rate_direct(const oracle::Chain& c, const std::vector<std::size_t>& stars, std::size_t x,
                         std::size_t y) {
  std::vector<std::size_t> others;
  for (std::size_t z = 0; z < stars.size(); ++z)
    if (z != y) others.push_back(stars[z]);
  const auto p = oracle::equilibrium(c, {stars[y]}, others);
  double rate = 0.0;
  for (Eigen::Index j = 0; j < c.q.cols(); ++j)
    if (static_cast<std::size_t>(j) != stars[x]) rate += c.q(stars[x], j) * p.h(j);
  return rate;
}

}  // namespace

TEST_CASE("three-state series capacity") {
  const auto s = make(fixtures::two_site(), 2, 0.1);
  const auto& space = s.gen.space();
  const auto rep = solve_equilibrium_potential(s.gen, {space.condensate(0)}, {space.condensate(1)});
  const double mu_end = 0.055 / 0.12, mu_mid = 0.01 / 0.12;
  const double expected = 1.0 / (1.0 / (mu_end * 2 * 0.1) + 1.0 / (mu_mid * 1.1));
  CHECK(rep.capacity == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rep.capacity == doctest::Approx(4.58e-2).epsilon(2e-3));
  CHECK(rep.capacity_dirichlet == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("two-site capacities equal the series oracle, and both hitting routes agree") {
  for (Occupation n : {10u, 50u, 200u})
    for (double d : {0.5, 0.05}) {
      const auto s = make(fixtures::two_site(), n, d);
      const auto& space = s.gen.space();
      const Index a = space.condensate(0), b = space.condensate(1);
      const auto rep = solve_equilibrium_potential(s.gen, {a}, {b});
      CHECK(oracle::relative(rep.capacity, oracle::two_site_capacity(n, d, 1.0, 1.0)) <= 1e-8);
      REQUIRE(rep.mean_hitting_from_a);
      CHECK(oracle::relative(*rep.mean_hitting_from_a, mean_hitting_time(s.gen, a, {b})) <= 1e-8);
    }
  const auto s = make(fixtures::two_site(2.0, 0.5), 40, 0.1);
  const auto& space = s.gen.space();
  const auto rep = solve_equilibrium_potential(s.gen, {space.condensate(0)}, {space.condensate(1)});
  CHECK(oracle::relative(rep.capacity, oracle::two_site_capacity(40, 0.1, 2.0, 0.5)) <= 1e-8);
}

TEST_CASE("potentials, capacities and hitting times match dense solves") {
  for (const auto& r : {fixtures::chain3(), fixtures::complete3(), fixtures::chain4()}) {
    const Occupation n = 12;
    const double d = inverse_log_squared(n);
    const auto s = make(r, n, d);
    const auto chain = oracle::inclusion_chain(r, n, d);
    const auto& space = s.gen.space();
    const Index a = space.condensate(0), b = space.condensate(r.size() - 1);

    const auto rep = solve_equilibrium_potential(s.gen, {a}, {b});
    const auto ref = oracle::equilibrium(chain, {a}, {b});
    CHECK(oracle::relative(rep.capacity, ref.capacity) <= 1e-8);
    CHECK(oracle::relative(rep.mu_h, ref.mu_h) <= 1e-8);
    for (Index i = 0; i < space.size(); ++i) CHECK(std::abs(rep.h[i] - ref.h(i)) <= 1e-9);

    const auto u = solve_hitting_times(s.gen, {b});
    const auto uref = oracle::hitting_times(chain, {b});
    for (Index i = 0; i < space.size(); ++i) CHECK(u.u[i] == doctest::Approx(uref(i)).epsilon(1e-8));
  }
}

TEST_CASE("sets covering the whole space") {
  const auto s = make(fixtures::two_site(), 1, 0.5);
  const auto rep = solve_equilibrium_potential(s.gen, {1}, {0});
  CHECK(rep.h == std::vector<double>{0.0, 1.0});
  CHECK(rep.iterations == 0);
  CHECK(rep.capacity == doctest::Approx(0.25));
}

TEST_CASE("single exponential holding times") {
  const auto s = make(fixtures::two_site(), 1, 0.5);
  const auto& space = s.gen.space();
  CHECK(mean_hitting_time(s.gen, space.condensate(0), {space.condensate(1)}) == doctest::Approx(2.0));

  // From (1,1) with N = 2 every jump lands on a condensate.
  const auto t = make(fixtures::two_site(3.0, 3.0), 2, 0.4);
  const auto& sp = t.gen.space();
  const Index mid = sp.rank(Configuration{{1, 1}});
  CHECK(mean_hitting_time(t.gen, mid, {sp.condensate(0), sp.condensate(1)}) ==
        doctest::Approx(1.0 / t.gen.exit_rates()[mid]).epsilon(1e-12));
}

TEST_CASE("symmetric pair: h and its mirror image sum to one") {
  const Occupation n = 30;
  const auto s = make(fixtures::two_site(), n, 0.2);
  const auto& space = s.gen.space();
  const auto rep = solve_equilibrium_potential(s.gen, {space.condensate(0)}, {space.condensate(1)});
  for (Occupation l = 0; l <= n; ++l) {
    const Index i = space.rank(Configuration{{l, n - l}}), j = space.rank(Configuration{{n - l, l}});
    CHECK(rep.h[i] + rep.h[j] == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("property: maximum principle, capacity symmetry and monotonicity") {
  for (const auto& r : {fixtures::chain3(), fixtures::complete3(), fixtures::chain4()}) {
    const Occupation n = 20;
    const auto s = make(r, n, 0.1);
    const auto& space = s.gen.space();
    const Index a = space.condensate(0), b = space.condensate(r.size() - 1), c = space.condensate(1);

    const auto ab = solve_equilibrium_potential(s.gen, {a}, {b});
    for (double v : ab.h) CHECK((v >= -kMaximumPrincipleSlack && v <= 1.0 + kMaximumPrincipleSlack));
    const auto ba = solve_equilibrium_potential(s.gen, {b}, {a});
    CHECK(oracle::relative(ab.capacity, ba.capacity) <= 1e-9);

    const auto abc = solve_equilibrium_potential(s.gen, {a}, {b, c});
    CHECK(abc.capacity >= ab.capacity * (1.0 - 1e-12));
    std::vector<Index> wide{b, c};
    for (Index i = 0; i < space.size(); i += 7)
      if (i != a && i != b && i != c) wide.push_back(i);
    const auto big = solve_equilibrium_potential(s.gen, {a}, wide);
    CHECK(big.capacity >= abc.capacity * (1.0 - 1e-12));
  }
}

TEST_CASE("bad sets") {
  const auto s = make(fixtures::chain3(), 5, 0.5);
  CHECK_ERRC(solve_equilibrium_potential(s.gen, {}, {1}), Errc::BadSets);
  CHECK_ERRC(solve_equilibrium_potential(s.gen, {1}, {}), Errc::BadSets);
  CHECK_ERRC(solve_equilibrium_potential(s.gen, {1, 2}, {2}), Errc::BadSets);
  CHECK_ERRC(solve_equilibrium_potential(s.gen, {1}, {1000}), Errc::BadSets);
  CHECK_ERRC(mean_hitting_time(s.gen, 3, {3}), Errc::BadSets);
  CHECK_ERRC(trace_rates(s.gen, {0}), Errc::BadSets);
}

TEST_CASE("iteration cap is reported as divergence") {
  const auto s = make(fixtures::chain4(), 30, 0.05);
  const auto& space = s.gen.space();
  SolverOptions starved;
  starved.iteration_factor = 0.01;
  CHECK_ERRC(solve_equilibrium_potential(s.gen, {space.condensate(0)}, {space.condensate(3)}, starved),
             Errc::SolverDiverged);
}

TEST_CASE("trace rates") {
  const auto sym = make(fixtures::two_site(), 25, 0.2);
  const auto& sp = sym.gen.space();
  const auto rates = trace_rates(sym.gen, {sp.condensate(0), sp.condensate(1)});
  CHECK(rates[0][1] == doctest::Approx(rates[1][0]).epsilon(1e-9));
  CHECK(rates[0][0] == 0.0);

  const auto r = fixtures::complete3();
  const Occupation n = 10;
  const double d = 0.2;
  const auto s = make(r, n, d);
  const auto chain = oracle::inclusion_chain(r, n, d);
  const auto& space = s.gen.space();
  const std::vector<Index> stars{space.condensate(0), space.condensate(1), space.condensate(2)};
  const auto tr = trace_rates(s.gen, stars);
  const std::vector<std::size_t> star_idx(stars.begin(), stars.end());
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 3; ++y) {
      if (x == y) continue;
      CHECK(tr[x][y] >= 0.0);
      CHECK(oracle::relative(tr[x][y], trace_rate_direct(chain, star_idx, x, y)) <= 1e-8);
    }
}
