#include <doctest.h>

#include <cmath>
#include <vector>

#include "iscpt/array_model.hpp"
#include "iscpt/rng.hpp"
#include "iscpt/scenario.hpp"
#include "oracles.hpp"

using namespace iscpt;

namespace {

// Per-element exponential, written out without the library's helpers.
VectorXcd steering_oracle(int n, double theta) {
  VectorXcd v(n);
  for (int p = 0; p < n; ++p) v[p] = std::exp(cd(0.0, kPi * (p - (n - 1) / 2.0) * std::sin(theta)));
  return v;
}

}  // namespace

TEST_CASE("steering vectors") {
  const ArrayGeometry g4(4, 3);
  CHECK((steering_tx(g4, 0.0) - VectorXcd::Ones(4)).norm() < 1e-15);
  CHECK((steering_rx(g4, 0.0) - VectorXcd::Ones(3)).norm() < 1e-15);

  const ArrayGeometry g2(2, 2);
  const VectorXcd a = steering_tx(g2, kPi / 2);
  CHECK(std::abs(a[0] - cd(0, -1)) < 1e-15);
  CHECK(std::abs(a[1] - cd(0, 1)) < 1e-15);
  const VectorXcd b = steering_rx(g2, kPi / 2);
  CHECK(std::abs(b[0] - cd(0, -1)) < 1e-15);
  CHECK(std::abs(b[1] - cd(0, 1)) < 1e-15);

  const ArrayGeometry g16(16, 20);
  CHECK((steering_tx(g16, 0.3) - steering_oracle(16, 0.3)).norm() < 1e-13);
  CHECK((steering_rx(g16, -0.7) - steering_oracle(20, -0.7)).norm() < 1e-13);

  for (double th = -1.5; th <= 1.5; th += 0.1) {
    const VectorXcd r = steering_rx(g16, th);
    for (int p = 0; p < 20; ++p) {
      CHECK(std::abs(std::abs(r[p]) - 1.0) <= 1e-12);
      CHECK(std::abs(r[p] - std::conj(r[19 - p])) < 1e-12);
    }
  }
}

TEST_CASE("geometry validation and element positions") {
  CHECK_THROWS_AS(ArrayGeometry(0, 3), ValidationError);
  CHECK_THROWS_AS(ArrayGeometry(3, 0), ValidationError);
  const ArrayGeometry g(4, 3);
  const VectorXd pos = g.element_positions_tx();
  CHECK(pos[0] == doctest::Approx(-0.75));
  CHECK(pos[3] == doctest::Approx(0.75));
  CHECK(pos.sum() == doctest::Approx(0.0));
}

TEST_CASE("response pair and its derivative") {
  const ArrayGeometry g2(2, 2);
  const auto p0 = response_pair(g2, 0.0);
  CHECK((p0.a_mat - MatrixXcd::Ones(2, 2)).norm() < 1e-15);

  const ArrayGeometry g(16, 20);
  for (int i = 0; i < 20; ++i) {
    const double th = -1.4 + i * (2.8 / 19);
    const auto p = response_pair(g, th);
    const double h = 1e-5;
    const MatrixXcd fd = (response_pair(g, th + h).a_mat - response_pair(g, th - h).a_mat) / (2 * h);
    CHECK((p.a_dot - fd).norm() <= 1e-6 * p.a_dot.norm());
    CHECK((p.a_mat.adjoint() * p.a_mat).trace().real() == doctest::Approx(16.0 * 20.0));
    // centred positions: b_dot^H b = 0
    CHECK(std::abs(steering_rx_derivative(g, th).dot(steering_rx(g, th))) < 1e-10);
  }
  const auto p = response_pair(g, 0.4);
  Eigen::JacobiSVD<MatrixXcd> svd(p.a_mat);
  CHECK(svd.singularValues()[1] < 1e-10 * svd.singularValues()[0]);
  Eigen::JacobiSVD<MatrixXcd> svd_dot(p.a_dot);
  CHECK(svd_dot.singularValues()[2] < 1e-10 * svd_dot.singularValues()[0]);
}

TEST_CASE("beampattern") {
  const ArrayGeometry g(8, 4);
  std::vector<double> grid;
  for (int i = -8; i <= 8; ++i) grid.push_back(i * 0.17);
  for (double v : beampattern<double>(g, MatrixXcd::Identity(8, 8), grid)) CHECK(v == doctest::Approx(8.0));

  const VectorXcd a = steering_tx(g, 0.2);
  const std::vector<double> at{0.2};
  CHECK(beampattern<double>(g, a * a.adjoint(), at)[0] == doctest::Approx(64.0));

  MatrixXcd bad = MatrixXcd::Identity(8, 8);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(beampattern<double>(g, bad, at), ValidationError);
  CHECK_THROWS_AS(beampattern<double>(g, MatrixXcd::Identity(3, 3), at), ValidationError);
}

TEST_CASE("philox matches independent known answers") {
  // Reference blocks from numpy.random.Philox (an unrelated implementation).
  using B = Philox4x64::Block;
  CHECK(Philox4x64::bijection({0, 0, 0, 0}, {0, 0}) ==
        B{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  CHECK(Philox4x64::bijection({1, 0, 0, 0}, {7, 1ULL << 32}) ==
        B{0xc3bb0c0fb2f40db4ULL, 0xac7a15549999b060ULL, 0xf6f315caddf36b15ULL, 0x3442801ac72055eaULL});
  CHECK(Philox4x64::bijection({5, 0, 0, 0}, {123456789, (4ULL << 32) | 3}) ==
        B{0x8652bc5e017d505fULL, 0xb087ebafe043fd88ULL, 0xa1d48bf32fba36c3ULL, 0x3721713d2c6b925fULL});

  Philox4x64 gen(0, 0);
  CHECK(gen.next_u64() == 0x16554d9eca36314cULL);
  for (int i = 0; i < 1000; ++i) {
    const double u = gen.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("channel generation") {
  const ArrayGeometry g(16, 20);
  const ChannelDraw a = generate_channels(42, 12, 12, g);
  const ChannelDraw b = generate_channels(42, 12, 12, g);
  CHECK(a.h.rows() == 12);
  CHECK(a.h.cols() == 16);
  CHECK(a.c.rows() == 12);
  CHECK(a.c.cols() == 16);
  CHECK(a.h == b.h);
  CHECK(a.c == b.c);
  CHECK(a.h != generate_channels(43, 12, 12, g).h);
  CHECK_FALSE(a.warnings.empty());  // K + M >= N_t

  // Rows depend only on (seed, row): a K=6 draw is a prefix of K=12.
  const ChannelDraw small = generate_channels(42, 6, 12, g);
  CHECK(small.h == a.h.topRows(6));
  CHECK(small.c == a.c);

  CHECK(generate_channels(1, 2, 1, g).warnings.empty());
  CHECK_THROWS_AS(generate_channels(1, 0, 1, g), ValidationError);

  ComplexGaussian cg(9, Stream::ir_channels, 1);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += std::norm(cg());
  CHECK(acc / n >= 0.98);
  CHECK(acc / n <= 1.02);
}

TEST_CASE("extended target response") {
  const ArrayGeometry g(16, 20);
  const ExtendedTarget one = extended_trm(3, g, 1);
  Eigen::JacobiSVD<MatrixXcd> s1(one.g);
  CHECK(s1.singularValues()[1] < 1e-8 * s1.singularValues()[0]);

  const ExtendedTarget five = extended_trm(3, g, 5);
  MatrixXcd sum = MatrixXcd::Zero(20, 16);
  for (int n = 0; n < 5; ++n) {
    CHECK(std::abs(five.thetas[n]) < kPi / 3);
    sum += five.alphas[n] * steering_oracle(20, five.thetas[n]) * steering_oracle(16, five.thetas[n]).adjoint();
  }
  CHECK((sum - five.g).norm() < 1e-12);
  Eigen::JacobiSVD<MatrixXcd> s5(five.g);
  const VectorXd sv = s5.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-8 * sv[0];
  CHECK(rank == 5);
  CHECK_THROWS_AS(extended_trm(3, g, 0), ValidationError);
}

TEST_CASE("scenario build and invariants") {
  ScenarioConfig cfg;
  const Scenario s = cfg.build(7);
  CHECK(s.p_budget == doctest::Approx(1000.0));
  CHECK(s.sigma_c2 == doctest::Approx(1.0));
  CHECK(s.eta[0] == doctest::Approx(std::pow(10.0, 0.8)));
  CHECK(s.k() == 12);
  CHECK(s.m() == 12);
  CHECK(s.beta[3] == doctest::Approx(0.5));

  cfg.layout = Layout::colocated;
  const Scenario co = cfg.build(7);
  CHECK(co.m() == co.k());
  CHECK(co.c() == co.h);
  CHECK(co.h == s.h);
  CHECK((co.c_mat(2) - co.h_mat(2)).norm() == 0.0);

  Scenario bad = s;
  bad.beta[0] = 1.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.p_budget = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = s;
  bad.eta[1] = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  const ScenarioConfig q = ScenarioConfig{}.quick();
  CHECK(q.n_tx == 8);
  CHECK(q.n_rx == 10);
  CHECK(q.k == 4);
  CHECK(q.m == 4);
  CHECK(layout_from_string(to_string(Layout::colocated)) == Layout::colocated);
  CHECK_THROWS_AS(layout_from_string("nowhere"), ValidationError);
}
