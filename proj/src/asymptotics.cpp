#include "riplab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riplab/error.hpp"

namespace riplab {

namespace {

std::vector<Site> chain_or_throw(const SiteKernel& kernel, std::size_t min_sites, std::size_t max_sites,
                                 const char* what) {
  auto order = chain_order(kernel);
  if (!order || kernel.size() < min_sites || kernel.size() > max_sites)
    throw Error(Errc::ScaleNotApplicable, what);
  return *order;
}

void check_d(double d) {
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::BadParameter, "d_N must be positive");
}

// ∫_0^a (1 - x) dx, ∫_0^a x dx, ∫_0^a x(1 - x) dx.
double integral_one_minus(double a) { return a - 0.5 * a * a; }
double integral_identity(double a) { return 0.5 * a * a; }
double integral_bump(double a) { return 0.5 * a * a - a * a * a / 3.0; }

}  // namespace

ScalePrediction predict_scale1(const SiteKernel& kernel, double d, Site x) {
  check_d(d);
  if (x >= kernel.size() || !kernel.in_s_star(x))
    throw Error(Errc::ScaleNotApplicable, "start site is not in S*");
  double total = 0.0;
  for (Site y : kernel.s_star())
    if (y != x) total += kernel.rate(x, y);
  if (!(total > 0.0))
    throw Error(Errc::ScaleNotApplicable, "no positive rate from the start site into S*");

  ScalePrediction p;
  p.scale = 1;
  p.theta = 1.0 / d;
  p.mean_time = 1.0 / (d * total);
  p.capacity = d * total / static_cast<double>(kernel.kappa_star());
  const auto& star = kernel.s_star();
  p.rates.assign(star.size(), std::vector<double>(star.size(), 0.0));
  for (std::size_t i = 0; i < star.size(); ++i)
    for (std::size_t j = 0; j < star.size(); ++j)
      if (i != j) p.rates[i][j] = kernel.rate(star[i], star[j]);
  p.source =
      "first time-scale: mean time 1/(d_N sum_{y in S*} r(x,y)), capacity d_N sum_{y in S*} r(x,y) / kappa*, "
      "limiting rates r(x,y) on S*";
  return p;
}

ScalePrediction predict_scale2(const SiteKernel& kernel, double d, Occupation n_particles) {
  check_d(d);
  const auto order = chain_or_throw(kernel, 3, 3, "second time-scale needs a three-site linear chain");
  const Site a = order[0], b = order[1], c = order[2];
  const double constant = (1.0 / kernel.rate(a, b) + 1.0 / kernel.rate(c, b)) * (1.0 - kernel.m_star(b));

  ScalePrediction p;
  p.scale = 2;
  p.theta = n_particles / (d * d);
  p.mean_time = constant * p.theta;
  p.capacity = 1.0 / (constant * p.theta);
  // Indexed like s_star(), which is sorted, so a and c appear in site order.
  p.rates = {{0.0, 1.0 / constant}, {1.0 / constant, 0.0}};
  p.source =
      "second time-scale: mean time (1/r(1,2) + 1/r(3,2))(1 - m*(2)) N/d_N^2 and capacity "
      "(1/r(1,2) + 1/r(3,2))^-1 / (1 - m*(2)) d_N^2/N, condensate alternates between the chain ends";
  return p;
}

ScalePrediction predict_scale3_bracket(const SiteKernel& kernel, double d, Occupation n_particles) {
  check_d(d);
  const auto order =
      chain_or_throw(kernel, 4, kernel.size(), "third time-scale needs a linear chain of at least four sites");
  double resistance_low = 0.0, resistance_high = 0.0;
  for (std::size_t p = 1; p + 2 < order.size(); ++p) {
    const double m = kernel.m_star(order[p]), m_next = kernel.m_star(order[p + 1]);
    const double r = kernel.rate(order[p], order[p + 1]);
    resistance_low += 1.0 / (m * r);
    resistance_high += (1.0 - m) * (1.0 - m_next) / (m * r);
  }
  const Bracket capacity{3.0 / resistance_low, 3.0 / resistance_high};
  const double kappa_star = static_cast<double>(kernel.kappa_star());

  ScalePrediction p;
  p.scale = 3;
  p.theta = static_cast<double>(n_particles) * n_particles / (d * d * d);
  p.capacity_constants = capacity;
  p.hitting_constants = Bracket{1.0 / (kappa_star * capacity.upper), 1.0 / (kappa_star * capacity.lower)};
  p.capacity_bracket = Bracket{capacity.lower / p.theta, capacity.upper / p.theta};
  p.hitting_bracket = Bracket{p.hitting_constants->lower * p.theta, p.hitting_constants->upper * p.theta};
  p.source =
      "third time-scale: asymptotic-constant bounds from the capacity bracket "
      "[3/sum 1/(m*(p) r(p,p+1)), 3/sum (1-m*(p))(1-m*(p+1))/(m*(p) r(p,p+1))] d^3/N^2 with mu(h) -> 1/kappa*";
  return p;
}

double scale2_capacity_lower_bound(const SiteKernel& kernel, Site x, Site y) {
  if (x >= kernel.size() || y >= kernel.size() || x == y)
    throw Error(Errc::BadParameter, "need two distinct sites");
  double total = 0.0;
  for (Site v = 0; v < kernel.size(); ++v) {
    if (v == x || v == y) continue;
    const double rx = kernel.rate(x, v), ry = kernel.rate(y, v);
    if (rx == 0.0 || ry == 0.0 || kernel.m_star(v) >= 1.0) continue;
    total += 1.0 / ((1.0 / rx + 1.0 / ry) * (1.0 - kernel.m_star(v)));
  }
  return total;
}

double series_conductance(std::span<const double> weights) {
  if (weights.empty()) throw Error(Errc::BadWeights, "no conductances");
  double resistance = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(Errc::BadWeights, "conductances must be positive");
    resistance += 1.0 / w;
  }
  return 1.0 / resistance;
}

double phi(double t, double epsilon) {
  if (t <= epsilon) return 0.0;
  if (t >= 1.0 - epsilon) return 1.0;
  return std::clamp((t - epsilon) / (1.0 - 2.0 * epsilon), 0.0, 1.0);
}

TestFunctionSpec test_function_spec(int scale, double epsilon, Site source) {
  TestFunctionSpec spec;
  spec.epsilon = epsilon;
  spec.source = source;
  switch (scale) {
    case 1: spec.family = TestFamily::PhiTube; break;
    case 2: spec.family = TestFamily::TwoParameterG; break;
    case 3: spec.family = TestFamily::ThirdScaleC; break;
    default: throw Error(Errc::BadSpec, "scale must be 1, 2 or 3");
  }
  return spec;
}

std::vector<double> third_scale_weights(const SiteKernel& kernel) {
  const auto order = chain_or_throw(kernel, 4, kernel.size(), "third time-scale needs a linear chain of at least four sites");
  std::vector<double> c;
  for (std::size_t p = 1; p + 2 < order.size(); ++p) {
    const double m = kernel.m_star(order[p]), m_next = kernel.m_star(order[p + 1]);
    c.push_back((1.0 - m) * (1.0 - m_next) / (m * kernel.rate(order[p], order[p + 1])));
  }
  const double total = std::accumulate(c.begin(), c.end(), 0.0);
  for (double& v : c) v /= total;
  return c;
}

namespace {

void check_spec(const TestFunctionSpec& spec, int scale, const SiteKernel& kernel) {
  if (!(spec.epsilon > 0.0) || spec.epsilon > kMaxEpsilon)
    throw Error(Errc::BadSpec, "epsilon must lie in (0, " + std::to_string(kMaxEpsilon) + "]");
  const TestFamily expected = scale == 1   ? TestFamily::PhiTube
                              : scale == 2 ? TestFamily::TwoParameterG
                              : scale == 3 ? TestFamily::ThirdScaleC
                                           : throw Error(Errc::BadSpec, "scale must be 1, 2 or 3");
  if (spec.family != expected) throw Error(Errc::BadSpec, "test-function family does not match the scale");
  if (scale == 1) {
    if (spec.source >= kernel.size() || !kernel.in_s_star(spec.source))
      throw Error(Errc::BadSpec, "source site must be in S*");
    if (kernel.kappa_star() < 2) throw Error(Errc::BadSpec, "S* has a single site");
    return;
  }
  const auto order = chain_order(kernel);
  if (!order || (scale == 2 && kernel.size() != 3) || (scale == 3 && kernel.size() < 4))
    throw Error(Errc::BadSpec, "kernel shape does not fit the time-scale");
}

}  // namespace

TestFunctionSets test_function_sets(const TestFunctionSpec& spec, const SiteKernel& kernel,
                                    const ConfigSpace& space) {
  TestFunctionSets sets;
  if (spec.family == TestFamily::PhiTube) {
    sets.source.push_back(space.condensate(spec.source));
    for (Site y : kernel.s_star())
      if (y != spec.source) sets.target.push_back(space.condensate(y));
    return sets;
  }
  const auto order = chain_order(kernel);
  if (!order) throw Error(Errc::BadSpec, "kernel is not a linear chain");
  sets.source.push_back(space.condensate(order->front()));
  sets.target.push_back(space.condensate(order->back()));
  return sets;
}

std::vector<double> evaluate_test_function(const TestFunctionSpec& spec, int scale, const SiteKernel& kernel,
                                           const ConfigSpace& space) {
  check_spec(spec, scale, kernel);
  if (space.sites() != kernel.size()) throw Error(Errc::BadSpec, "space and kernel disagree on kappa");
  const double n = space.particles();
  const double eps = spec.epsilon;
  std::vector<double> f(space.size());

  if (scale == 1) {
    const Site x = spec.source;
    space.for_each([&](Index i, std::span<const Occupation> eta) { f[i] = phi(eta[x] / n, eps); });
  } else if (scale == 2) {
    const auto order = *chain_order(kernel);
    const double r12 = kernel.rate(order[0], order[1]), r32 = kernel.rate(order[2], order[1]);
    const double norm = 2.0 / (1.0 / r12 + 1.0 / r32);
    space.for_each([&](Index i, std::span<const Occupation> eta) {
      const double j = eta[order[0]], l = eta[order[1]];
      const double left = phi((j - 1.0) / n, 2.0 * eps);
      const double right = phi((j - 1.0) / n + std::min(l / n, eps), 2.0 * eps);
      f[i] = norm * (integral_one_minus(left) / r12 + integral_identity(right) / r32);
    });
  } else {
    const auto order = *chain_order(kernel);
    std::vector<double> c = spec.weights.empty() ? third_scale_weights(kernel) : spec.weights;
    if (c.size() != order.size() - 3) throw Error(Errc::BadSpec, "need one weight per interior link");
    for (double v : c)
      if (!(v >= 0.0)) throw Error(Errc::BadSpec, "weights must be nonnegative");
    if (std::abs(std::accumulate(c.begin(), c.end(), 0.0) - 1.0) > 1e-12)
      throw Error(Errc::BadSpec, "weights must sum to one");
    space.for_each([&](Index i, std::span<const Occupation> eta) {
      const double head = eta[order[0]] / n;
      double partial = 0.0, value = 0.0;
      for (std::size_t l = 1; l + 2 < order.size(); ++l) {
        partial += eta[order[l]];
        value += c[l - 1] * integral_bump(phi(head + std::min(partial / n, eps), 2.0 * eps));
      }
      f[i] = 6.0 * value;
    });
  }

  const auto sets = test_function_sets(spec, kernel, space);
  for (Index i : sets.source) f[i] = 1.0;
  for (Index i : sets.target) f[i] = 0.0;
  return f;
}

}  // namespace riplab
