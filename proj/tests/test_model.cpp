#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "riplab/model.hpp"
#include "support.hpp"

using namespace riplab;

TEST_CASE("symmetric pair has uniform measure and full S*") {
  const auto k = fixtures::kernel(fixtures::two_site());
  CHECK(k.measure(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(k.measure(1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(k.s_star() == std::vector<Site>{0, 1});
  CHECK(k.kappa_star() == 2);
}

TEST_CASE("three-site chain measure solved by detailed balance") {
  const auto k = fixtures::kernel({{0, 1, 0}, {2, 0, 1}, {0, 2, 0}});
  // m(2) = m(1) r(1,2)/r(2,1) = 1/2, m(3) = m(2) r(2,3)/r(3,2) = 1/4.
  const double total = 1.0 + 0.5 + 0.25;
  CHECK(k.measure(0) == doctest::Approx(1.0 / total).epsilon(1e-12));
  CHECK(k.measure(1) == doctest::Approx(0.5 / total).epsilon(1e-12));
  CHECK(k.measure(2) == doctest::Approx(0.25 / total).epsilon(1e-12));
  CHECK(k.s_star() == std::vector<Site>{0});

  const auto chain = fixtures::kernel(fixtures::chain3());
  CHECK(chain.m_star(0) == 1.0);
  CHECK(chain.m_star(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(chain.m_star(2) == 1.0);
  CHECK(chain.s_star() == std::vector<Site>{0, 2});
  CHECK(chain.kappa_star() == 2);
}

TEST_CASE("validation errors") {
  CHECK_ERRC(build_kernel({{0, 1}, {0, 0}}), Errc::NotIrreducible);
  CHECK_ERRC(build_kernel({{1, 1}, {1, 0}}), Errc::BadDiagonal);
  CHECK_ERRC(build_kernel({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}), Errc::NotReversible);
  // Kolmogorov's criterion fails on a 3-cycle with unequal products around it.
  CHECK_ERRC(build_kernel({{0, 2, 1}, {1, 0, 2}, {2, 1, 0}}), Errc::NotReversible);
  CHECK_ERRC(build_kernel({{0}}), Errc::BadInput);
  CHECK_ERRC(build_kernel({{0, -1}, {1, 0}}), Errc::BadInput);
  CHECK_ERRC(build_kernel({{0, 1}, {1, 0}}, std::vector<double>{0.9, 0.1}), Errc::NotReversible);
}

TEST_CASE("given measure is normalised and checked") {
  const auto k = build_kernel(fixtures::chain3(), std::vector<double>{2.0, 1.0, 2.0});
  CHECK(k.measure(0) == doctest::Approx(0.4));
  CHECK(k.s_star() == std::vector<Site>{0, 2});
}

TEST_CASE("linear chain classification") {
  CHECK(is_linear_chain(fixtures::kernel(fixtures::chain3())));
  CHECK(is_linear_chain(fixtures::kernel(fixtures::chain4())));
  CHECK_FALSE(is_linear_chain(fixtures::kernel(fixtures::complete3())));
  CHECK_FALSE(is_linear_chain(fixtures::kernel({{0, 1, 0}, {2, 0, 1}, {0, 2, 0}})));

  // Site 0 in the middle: the chain is 1-0-2 after relabelling.
  const auto shuffled = fixtures::kernel({{0, 2, 2}, {1, 0, 0}, {1, 0, 0}});
  const auto order = chain_order(shuffled);
  REQUIRE(order);
  CHECK(*order == std::vector<Site>{1, 0, 2});
  CHECK(chain_order(fixtures::kernel(fixtures::chain4())) == std::vector<Site>{0, 1, 2, 3});
}

TEST_CASE("property: detailed balance, rescaling and idempotence on random reversible kernels") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t kappa = 2 + trial % 4;
    std::vector<double> m(kappa);
    for (auto& v : m) v = u(rng);
    std::vector<std::vector<double>> r(kappa, std::vector<double>(kappa, 0.0));
    // Symmetric conductances c(x,y) give rates c/m(x), reversible for m.
    for (std::size_t x = 0; x < kappa; ++x)
      for (std::size_t y = x + 1; y < kappa; ++y)
        if (y == x + 1 || rng() % 2) {
          const double c = u(rng);
          r[x][y] = c / m[x];
          r[y][x] = c / m[y];
        }
    const auto k = build_kernel(r);
    for (std::size_t x = 0; x < kappa; ++x)
      for (std::size_t y = 0; y < kappa; ++y) {
        const double a = k.measure(x) * r[x][y], b = k.measure(y) * r[y][x];
        if (a > 0.0 || b > 0.0) CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
      }

    auto scaled = r;
    for (auto& row : scaled)
      for (auto& v : row) v *= 7.5;
    const auto ks = build_kernel(scaled);
    CHECK(ks.s_star() == k.s_star());
    for (std::size_t x = 0; x < kappa; ++x) {
      CHECK(ks.measure(x) == doctest::Approx(k.measure(x)).epsilon(1e-12));
      CHECK(ks.m_star(x) == doctest::Approx(k.m_star(x)).epsilon(1e-12));
    }

    const auto again = build_kernel(k.rate_matrix(), std::vector<double>(k.measure().begin(), k.measure().end()),
                                    k.labels());
    CHECK(again.s_star() == k.s_star());
    for (std::size_t x = 0; x < kappa; ++x) {
      CHECK(again.measure(x) == doctest::Approx(k.measure(x)).epsilon(1e-15));
      CHECK(again.m_star(x) == doctest::Approx(k.m_star(x)).epsilon(1e-15));
    }

    const auto ref = oracle::stationary(r);
    for (std::size_t x = 0; x < kappa; ++x) CHECK(k.measure(x) == doctest::Approx(ref[x]).epsilon(1e-10));
  }
}

TEST_CASE("labels map to dense sites") {
  const auto k = build_kernel(fixtures::two_site(), std::nullopt, {"a", "b"});
  CHECK(k.site_of("b") == 1);
  CHECK(k.label(0) == "a");
  CHECK_ERRC(k.site_of("c"), Errc::BadInput);
}
