#include "riplab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riplab/error.hpp"

namespace riplab {

SparseGenerator build_generator(const SiteKernel& kernel, const WeightTable& weights,
                                const ConfigSpace& space) {
  const std::size_t kappa = kernel.size();
  if (space.sites() != kappa) throw Error(Errc::BadInput, "space and kernel disagree on kappa");
  if (space.particles() != weights.particles())
    throw Error(Errc::BadInput, "space and weights disagree on N");

  SparseGenerator gen(space);
  gen.d_ = weights.d;
  gen.log_z_ = partition_function(kernel, weights);

  std::vector<double> log_m(kappa);
  for (Site x = 0; x < kappa; ++x) log_m[x] = std::log(kernel.m_star(x));

  const Index n = space.size();
  gen.row_begin_.reserve(n + 1);
  gen.exit_.reserve(n);
  gen.log_mu_.reserve(n);
  gen.row_begin_.push_back(0);

  std::vector<Occupation> moved(kappa);
  space.for_each([&](Index, std::span<const Occupation> eta) {
    double exit = 0.0;
    for (Site x = 0; x < kappa; ++x) {
      if (eta[x] == 0) continue;
      for (Site y = 0; y < kappa; ++y) {
        const double r = kernel.rate(x, y);
        if (x == y || r == 0.0) continue;
        const double rate = eta[x] * (weights.d + eta[y]) * r;
        std::copy(eta.begin(), eta.end(), moved.begin());
        --moved[x];
        ++moved[y];
        gen.targets_.push_back(space.rank(std::span<const Occupation>(moved)));
        gen.rates_.push_back(rate);
        exit += rate;
      }
    }
    gen.row_begin_.push_back(gen.targets_.size());
    gen.exit_.push_back(exit);
    gen.log_mu_.push_back(log_config_weight(log_m, weights, eta) - gen.log_z_);
  });

  gen.reverse_.resize(gen.targets_.size());
  for (Index i = 0; i < n; ++i) {
    for (std::size_t e = gen.row_begin_[i]; e < gen.row_begin_[i + 1]; ++e) {
      const Index j = gen.targets_[e];
      const auto first = gen.targets_.begin() + static_cast<std::ptrdiff_t>(gen.row_begin_[j]);
      const auto last = gen.targets_.begin() + static_cast<std::ptrdiff_t>(gen.row_begin_[j + 1]);
      const auto it = std::find(first, last, i);
      if (it == last) throw Error(Errc::NotReversible, "edge without a reverse edge");
      gen.reverse_[e] = static_cast<std::size_t>(it - gen.targets_.begin());
    }
  }

  const auto check = check_reversibility(gen, kReversibilitySample);
  if (check.max_relative_error > kReversibilityTol) {
    std::ostringstream os;
    os << "detailed balance violated on the configuration space, relative error "
       << check.max_relative_error;
    throw Error(Errc::NotReversible, os.str());
  }
  return gen;
}

ReversibilityCheck check_reversibility(const SparseGenerator& gen, std::size_t max_edges) {
  ReversibilityCheck out;
  const std::size_t m = gen.edge_count();
  if (m == 0 || max_edges == 0) return out;
  const std::size_t stride = max_edges >= m ? 1 : m / max_edges;

  // Row of each sampled edge, found by walking rows alongside the edge index.
  Index row = 0;
  for (std::size_t e = 0; e < m && out.edges_checked < max_edges; e += stride) {
    while (gen.last_edge(row) <= e) ++row;
    const Index j = gen.targets()[e];
    const std::size_t back = gen.reverse()[e];
    const double forward = gen.log_mu()[row] + std::log(gen.rates()[e]);
    const double backward = gen.log_mu()[j] + std::log(gen.rates()[back]);
    out.max_relative_error = std::max(out.max_relative_error, std::abs(std::expm1(forward - backward)));
    ++out.edges_checked;
  }
  return out;
}

double dirichlet_form(const SparseGenerator& gen, std::span<const double> f) {
  if (f.size() != gen.size()) throw Error(Errc::BadInput, "function size differs from state count");
  // Each undirected edge once, from its lower-ranked end, in rank order.
  double sum = 0.0, carry = 0.0;
  for (Index i = 0; i < gen.size(); ++i) {
    const double mu = std::exp(gen.log_mu()[i]);
    for (std::size_t e = gen.first_edge(i); e < gen.last_edge(i); ++e) {
      const Index j = gen.targets()[e];
      if (j < i) continue;
      const double diff = f[j] - f[i];
      const double term = mu * gen.rates()[e] * diff * diff - carry;
      const double next = sum + term;
      carry = (next - sum) - term;
      sum = next;
    }
  }
  return sum;
}

std::vector<double> apply_generator(const SparseGenerator& gen, std::span<const double> f) {
  if (f.size() != gen.size()) throw Error(Errc::BadInput, "function size differs from state count");
  std::vector<double> out(gen.size(), 0.0);
  for (Index i = 0; i < gen.size(); ++i) {
    double acc = 0.0;
    for (std::size_t e = gen.first_edge(i); e < gen.last_edge(i); ++e)
      acc += gen.rates()[e] * (f[gen.targets()[e]] - f[i]);
    out[i] = acc;
  }
  return out;
}

double stationarity_defect(const SparseGenerator& gen) {
  std::vector<double> flow(gen.size(), 0.0);
  double scale = 0.0;
  for (Index i = 0; i < gen.size(); ++i) {
    const double mu = std::exp(gen.log_mu()[i]);
    scale = std::max(scale, mu * gen.exit_rates()[i]);
    flow[i] -= mu * gen.exit_rates()[i];
    for (std::size_t e = gen.first_edge(i); e < gen.last_edge(i); ++e)
      flow[gen.targets()[e]] += mu * gen.rates()[e];
  }
  double worst = 0.0;
  for (double v : flow) worst = std::max(worst, std::abs(v));
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace riplab
