#pragma once

#include <doctest.h>

#include <vector>

#include "riplab/error.hpp"
#include "riplab/model.hpp"

#define CHECK_ERRC(expr, errc)                                   \
  do {                                                           \
    bool caught_ = false;                                        \
    try {                                                        \
      (void)(expr);                                              \
    } catch (const riplab::Error& e) {                           \
      caught_ = true;                                            \
      CHECK_MESSAGE(e.code() == (errc), e.what());               \
    }                                                            \
    CHECK_MESSAGE(caught_, "expected " #errc " from " #expr);    \
  } while (false)

namespace fixtures {

inline std::vector<std::vector<double>> two_site(double r12 = 1.0, double r21 = 1.0) {
  return {{0.0, r12}, {r21, 0.0}};
}

// m* = (1, 1/2, 1).
inline std::vector<std::vector<double>> chain3() {
  return {{0.0, 1.0, 0.0}, {2.0, 0.0, 2.0}, {0.0, 1.0, 0.0}};
}

// m* = (1, 1/2, 1/2, 1).
inline std::vector<std::vector<double>> chain4() {
  return {{0.0, 1.0, 0.0, 0.0}, {2.0, 0.0, 1.0, 0.0}, {0.0, 1.0, 0.0, 2.0}, {0.0, 0.0, 1.0, 0.0}};
}

// Uniform m with distinct symmetric rates 1, 2, 3.
inline std::vector<std::vector<double>> complete3() {
  return {{0.0, 1.0, 2.0}, {1.0, 0.0, 3.0}, {2.0, 3.0, 0.0}};
}

inline riplab::SiteKernel kernel(const std::vector<std::vector<double>>& r) { return riplab::build_kernel(r); }

}  // namespace fixtures
