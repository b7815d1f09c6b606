#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riplab/config_space.hpp"
#include "riplab/model.hpp"

namespace riplab {

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

struct ScalePrediction {
  int scale = 0;
  double theta = 0.0;
  // Scales 1 and 2.
  std::optional<double> mean_time;
  // Limiting capacity between the source condensate and the target
  // condensates, scales 1 and 2.
  std::optional<double> capacity;
  // Scale 3: hitting-time and capacity brackets in absolute units, and the
  // N- and d-free constants they are built from.
  std::optional<Bracket> hitting_bracket;
  std::optional<Bracket> capacity_bracket;
  std::optional<Bracket> hitting_constants;
  std::optional<Bracket> capacity_constants;
  // Limiting jump rates of the condensate on S*, indexed like kernel.s_star().
  std::vector<std::vector<double>> rates;
  std::string source;
};

// Scale θ = 1/d: mean time 1/(d Σ_{y∈S*} r(x,y)). Throws ScaleNotApplicable
// when x has no positive rate into S*.
ScalePrediction predict_scale1(const SiteKernel& kernel, double d, Site x);

// Scale θ = N/d² on a three-site chain a-b-c with S* = {a, c}:
// mean time (1/r(a,b) + 1/r(c,b))(1 - m*(b)) N / d².
ScalePrediction predict_scale2(const SiteKernel& kernel, double d, Occupation n_particles);

// Scale θ = N²/d³ on a chain of at least four sites.
ScalePrediction predict_scale3_bracket(const SiteKernel& kernel, double d, Occupation n_particles);

// Lower bound Σ_{v∉{x,y}} (1/r(x,v) + 1/r(y,v))^{-1} / (1 - m*(v)) on the
// scale-2 capacity constant between x and y on a general graph; terms with a
// missing edge are dropped. Not a validated prediction.
double scale2_capacity_lower_bound(const SiteKernel& kernel, Site x, Site y);

// (Σ 1/w)^{-1}; throws BadWeights for empty input or non-positive entries.
double series_conductance(std::span<const double> weights);

inline constexpr double kDefaultEpsilon = 0.05;
// Above 1 - √3/2 the clamp slope 1/(1-2ε) exceeds 1 + √ε.
inline constexpr double kMaxEpsilon = 0.1339745962155614;

// clamp((t - ε)/(1 - 2ε), 0, 1).
double phi(double t, double epsilon);

enum class TestFamily { PhiTube, TwoParameterG, ThirdScaleC };

struct TestFunctionSpec {
  TestFamily family = TestFamily::PhiTube;
  double epsilon = kDefaultEpsilon;
  // PhiTube: the source site x; F = 1 on E^x and 0 on the rest of E*.
  Site source = 0;
  // ThirdScaleC: weights c_2..c_{κ-2} along the chain; empty selects the
  // capacity-optimal choice.
  std::vector<double> weights;
};

// The default family for a time-scale.
TestFunctionSpec test_function_spec(int scale, double epsilon = kDefaultEpsilon, Site source = 0);

// c_p ∝ (1 - m*(p))(1 - m*(p+1)) / (m*(p) r(p,p+1)) along the chain, p = 2..κ-2,
// normalised to sum one.
std::vector<double> third_scale_weights(const SiteKernel& kernel);

// Source and target sets of the test function: ranks of E^source and of the
// rest of E* (scale 1) or of the far chain end (scales 2, 3).
struct TestFunctionSets {
  std::vector<Index> source;
  std::vector<Index> target;
};
TestFunctionSets test_function_sets(const TestFunctionSpec& spec, const SiteKernel& kernel,
                                    const ConfigSpace& space);

// The test function over E_N in rank order, exactly 1 on the source set and
// 0 on the target set. Throws BadSpec when the family does not fit the scale
// or kernel, or ε lies outside (0, kMaxEpsilon].
std::vector<double> evaluate_test_function(const TestFunctionSpec& spec, int scale,
                                           const SiteKernel& kernel, const ConfigSpace& space);

}  // namespace riplab
