#pragma once

#include <array>
#include <cstdint>

#include "iscpt/types.hpp"

namespace iscpt {

/// Philox4x64-10 counter-based generator (Random123 / numpy.random.Philox).
///
/// Output block n of stream (seed, stream) is philox({n, 0, 0, 0}, {seed, stream});
/// numpy reproduces it with Philox(key=[seed, stream], counter=[n-1, 0, 0, 0]).
class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static Block bijection(Block counter, Key key);

  Philox4x64(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform();
  /// Uniform on (0, 1].
  double next_uniform_open0() { return 1.0 - next_uniform(); }

 private:
  Key key_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int used_ = 4;
};

/// Named sub-streams; each draw family has its own key so adding draws to one
/// family never shifts another.
enum class Stream : std::uint64_t {
  ir_channels = 1,
  er_channels = 2,
  scatterers = 3,
  waveform = 4,
  noise = 5,
};

/// Circular complex Gaussian source with E|z|^2 = 1 (Box-Muller).
class ComplexGaussian {
 public:
  ComplexGaussian(std::uint64_t seed, Stream stream, std::uint64_t substream = 0)
      : gen_(seed, (static_cast<std::uint64_t>(stream) << 32) | substream) {}

  cd operator()();
  double uniform() { return gen_.next_uniform(); }

  MatrixXcd matrix(int rows, int cols);

 private:
  Philox4x64 gen_;
};

}  // namespace iscpt
