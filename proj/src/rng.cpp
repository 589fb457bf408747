#include "iscpt/rng.hpp"

#include <cmath>

namespace iscpt {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

Philox4x64::Block Philox4x64::bijection(Block c, Key k) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t Philox4x64::next_u64() {
  if (used_ == 4) {
    buffer_ = bijection({block_index_++, 0, 0, 0}, key_);
    used_ = 0;
  }
  return buffer_[used_++];
}

double Philox4x64::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

cd ComplexGaussian::operator()() {
  const double u1 = gen_.next_uniform_open0();
  const double u2 = gen_.next_uniform();
  // Each component has variance 1/2.
  const double r = std::sqrt(-std::log(u1));
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

MatrixXcd ComplexGaussian::matrix(int rows, int cols) {
  MatrixXcd out(rows, cols);
  // Row-major fill so that the first r rows of a larger draw match a smaller one.
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = (*this)();
  return out;
}

}  // namespace iscpt
