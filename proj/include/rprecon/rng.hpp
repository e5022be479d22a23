#pragma once

#include <cstdint>
#include <random>

#include "rprecon/types.hpp"

namespace rprecon {

/// Stream identifiers for the counter-based seed split. New streams get new
/// ids; existing ids never change meaning.
enum class Stream : std::uint64_t {
  Initialization = 1,
  ProblemData = 2,
  TestDirections = 3,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for one component stream, derived from the master seed only.
std::uint64_t stream_seed(std::uint64_t master, Stream stream,
                          std::uint64_t counter = 0);

/// Platform-independent standard normal draws (Box-Muller over
/// std::mt19937_64, whose output sequence is fixed by the standard).
class NormalSource {
public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}

  double next();
  Matrix matrix(Index rows, Index cols);

private:
  double uniform_open();

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace rprecon
