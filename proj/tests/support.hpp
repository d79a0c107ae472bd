#pragma once

#include <cstdint>
#include <random>

#include "lbvs/sim.hpp"

namespace lbvs::test {

// Small seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Pose2 pose(double xy, double angle) {
    return {uniform(-xy, xy), uniform(-xy, xy), uniform(-angle, angle)};
  }

  // A ground point the desk camera sees.
  Vec2 visible_ground() { return {uniform(0.06, 0.32), uniform(-0.08, 0.08)}; }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace lbvs::test
