#include <doctest.h>

#include <cmath>

#include "iscpt/positioning.hpp"
#include "iscpt/rng.hpp"

using namespace iscpt;

namespace {

const ArrayGeometry kGeom(16, 20);

MatrixXcd full_rank_waveform(int n, int t, std::uint64_t seed) { return ComplexGaussian(seed, Stream::waveform).matrix(n, t); }

}  // namespace

TEST_CASE("estimate_alpha") {
  const double theta = 0.4;
  const auto pair = response_pair(kGeom, theta);
  const MatrixXcd x = full_rank_waveform(16, 64, 1);
  const MatrixXcd r = x * x.adjoint() / 64.0;
  const cd alpha(0.004, -0.009);
  CHECK(std::abs(estimate_alpha(MatrixXcd(alpha * pair.a_mat), pair, r) - alpha) <= 1e-12 * std::abs(alpha));

  ComplexGaussian g(3, Stream::scatterers);
  const MatrixXcd g1 = g.matrix(20, 16), g2 = g.matrix(20, 16);
  const cd sum = estimate_alpha(MatrixXcd(g1 + g2), pair, r);
  CHECK(std::abs(sum - estimate_alpha(g1, pair, r) - estimate_alpha(g2, pair, r)) <= 1e-12 * std::abs(sum));

  CHECK_THROWS_AS(estimate_alpha(g1, pair, MatrixXcd::Zero(16, 16)), DegenerateIllumination);

  // unbiased at the true angle: mean error within 3 standard errors
  const int trials = 200;
  std::vector<cd> err;
  SensingFrame f;
  f.x = x;
  for (int t = 0; t < trials; ++t) {
    f.y_r = alpha * pair.a_mat * x + ComplexGaussian(5, Stream::noise, static_cast<std::uint64_t>(t)).matrix(20, 64);
    err.push_back(estimate_alpha(mle_trm(f), pair, r) - alpha);
  }
  for (auto part : {+[](cd z) { return z.real(); }, +[](cd z) { return z.imag(); }}) {
    double mean = 0.0, sq = 0.0;
    for (cd e : err) mean += part(e);
    mean /= trials;
    for (cd e : err) sq += (part(e) - mean) * (part(e) - mean);
    const double se = std::sqrt(sq / (trials - 1) / trials);
    CHECK(std::abs(mean) <= 3 * se);
  }
}

TEST_CASE("estimate_theta") {
  const MatrixXcd x = full_rank_waveform(16, 64, 2);
  const MatrixXcd r = x * x.adjoint() / 64.0;
  const cd alpha(0.01, 0.0);

  const MatrixXcd g0 = alpha * response_pair(kGeom, 0.0).a_mat;
  CHECK(std::abs(estimate_theta(kGeom, g0, r)) <= 1e-5);

  const double th = std::atan2(10.0, 20.0);
  CHECK(rad_to_deg(th) == doctest::Approx(26.565).epsilon(1e-4));
  const MatrixXcd g = alpha * response_pair(kGeom, th).a_mat;
  std::vector<std::pair<double, double>> profile;
  CHECK(std::abs(estimate_theta(kGeom, g, r, {}, &profile) - th) <= 1e-5);
  CHECK(profile.size() == 359);
  const double at = angle_objective(kGeom, g, r, th);
  CHECK(at >= angle_objective(kGeom, g, r, th + deg_to_rad(5)));
  CHECK(at >= angle_objective(kGeom, g, r, th - deg_to_rad(5)));

  AngleSearch bad;
  bad.hi = bad.lo;
  CHECK_THROWS_AS(estimate_theta(kGeom, g, r, bad), ValidationError);
  AngleSearch outside;
  outside.hi = 1.6;
  CHECK_THROWS_AS(estimate_theta(kGeom, g, r, outside), ValidationError);

  // a narrower window that still contains the target
  AngleSearch window;
  window.lo = deg_to_rad(20);
  window.hi = deg_to_rad(30);
  CHECK(std::abs(estimate_theta(kGeom, g, r, window) - th) <= 1e-5);
}

TEST_CASE("estimate_distance and estimate_position") {
  const DistanceModel model;
  const double d = std::sqrt(500.0);
  const cd alpha = std::polar(model.kappa / (d * d), 0.7);
  CHECK(estimate_distance(alpha, model) == doctest::Approx(d).epsilon(1e-12));
  CHECK(estimate_distance(alpha / 2.0, model) == doctest::Approx(d * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(estimate_distance(cd(0.01, 0.0), model) == doctest::Approx(d).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_distance(cd(0.0, 0.0), model), ValidationError);

  const Vector2d p = estimate_position({0, 0}, 0.0, 5.0);
  CHECK(p.x() == doctest::Approx(0.0));
  CHECK(p.y() == doctest::Approx(5.0));
  const Vector2d q = estimate_position({0, 0}, std::asin(10.0 / d), d);
  CHECK(std::abs(q.x() - 10.0) <= 1e-9);
  CHECK(std::abs(q.y() - 20.0) <= 1e-9);
  const Vector2d shift(-3.0, 7.5);
  CHECK((estimate_position(shift, 0.3, 4.0) - estimate_position({0, 0}, 0.3, 4.0) - shift).norm() <= 1e-12);

  const TargetGeometry tg = target_geometry({0, 0}, {10, 20}, model);
  CHECK(tg.theta == doctest::Approx(std::atan2(10.0, 20.0)));
  CHECK(tg.distance == doctest::Approx(d));
  CHECK(std::abs(tg.alpha - cd(0.01, 0.0)) <= 1e-15);
  CHECK_THROWS_AS(target_geometry({0, 0}, {10, -20}, model), ValidationError);
}

TEST_CASE("noiseless pipeline recovers the target") {
  const Vector2d bs(0, 0), target(10, 20);
  const TargetGeometry tg = target_geometry(bs, target);
  const MatrixXcd g = tg.alpha * response_pair(kGeom, tg.theta).a_mat;

  // full-rank waveform
  std::vector<VectorXcd> w;
  ComplexGaussian src(8, Stream::ir_channels);
  for (int k = 0; k < 16; ++k) w.push_back(src.matrix(16, 1).col(0));
  SensingFrame f = synthesize_frame(g, w, nullptr, 64, 1.0, 4, 0, true);
  PositionEstimate est = locate(kGeom, f, bs);
  CHECK((est.position - target).norm() <= 1e-3);
  CHECK(est.d_hat == doctest::Approx(std::sqrt(500.0)).epsilon(1e-5));
  CHECK((est.position - estimate_position(bs, est.theta_hat, est.d_hat)).norm() == 0.0);

  // rank-deficient waveform (two streams): the minimum-norm estimate still works
  const std::vector<VectorXcd> two{w[0], w[1]};
  f = synthesize_frame(g, two, nullptr, 64, 1.0, 4, 0, true);
  est = locate(kGeom, f, bs);
  CHECK((est.position - target).norm() <= 1e-3);

  // synthesis is keyed by (seed, trial)
  const SensingFrame a = synthesize_frame(g, two, nullptr, 64, 1.0, 4, 3);
  const SensingFrame b = synthesize_frame(g, two, nullptr, 64, 1.0, 4, 3);
  CHECK(a.y_r == b.y_r);
  CHECK(a.y_r != synthesize_frame(g, two, nullptr, 64, 1.0, 4, 2).y_r);
  CHECK(a.x == synthesize_frame(g, two, nullptr, 64, 1.0, 4, 3, true).x);
}

TEST_CASE("noise moves the estimate, more noise moves it further") {
  const Vector2d bs(0, 0), target(10, 20);
  const TargetGeometry tg = target_geometry(bs, target);
  const MatrixXcd g = tg.alpha * response_pair(kGeom, tg.theta).a_mat;
  std::vector<VectorXcd> w;
  ComplexGaussian src(9, Stream::ir_channels);
  for (int k = 0; k < 16; ++k) w.push_back(10.0 * src.matrix(16, 1).col(0));
  auto rmse = [&](double sigma2) {
    double acc = 0.0;
    for (int t = 1; t <= 40; ++t) {
      const SensingFrame f = synthesize_frame(g, w, nullptr, 64, sigma2, 6, t);
      acc += (locate(kGeom, f, bs).position - target).squaredNorm();
    }
    return std::sqrt(acc / 40);
  };
  const double quiet = rmse(1.0);
  const double loud = rmse(16.0);
  CHECK(quiet > 0.0);
  CHECK(loud > quiet);
}
