#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iscpt/array_model.hpp"
#include "iscpt/types.hpp"

namespace iscpt {

enum class Layout { separated, colocated };

std::string to_string(Layout layout);
Layout layout_from_string(const std::string& s);

/// Sum of point scatterers; g is the ground-truth target response matrix.
struct ExtendedTarget {
  int n_scatterers = 0;
  std::vector<cd> alphas;
  std::vector<double> thetas;
  MatrixXcd g;
};

/// Channels, receiver requirements and budgets for one deployment.
///
/// Powers are linear mW; SINR thresholds are linear. The dB forms only appear
/// in ScenarioConfig.
class Scenario {
 public:
  ArrayGeometry geometry;
  MatrixXcd h;  // K x N_t, row k is h_k^H
  VectorXd beta;
  VectorXd eta;
  VectorXd q;
  double p_budget = 1000.0;
  double sigma_c2 = 1.0;
  double sigma_r2 = 1.0;
  int t_len = 64;
  Layout layout = Layout::separated;

  int k() const { return static_cast<int>(h.rows()); }
  int m() const { return layout == Layout::colocated ? k() : static_cast<int>(c_.rows()); }
  int n_tx() const { return geometry.n_tx; }

  /// ER channel matrix (M x N_t, row m is c_m); the IR channels when co-located.
  const MatrixXcd& c() const { return layout == Layout::colocated ? h : c_; }
  void set_er_channels(MatrixXcd c) { c_ = std::move(c); }

  VectorXcd h_vec(int k) const { return h.row(k).adjoint(); }
  /// Column vector c_m^H so that harvested power is c_vec^H R c_vec.
  VectorXcd c_vec(int m) const { return c().row(m).adjoint(); }
  MatrixXcd h_mat(int k) const { return h_vec(k) * h_vec(k).adjoint(); }
  MatrixXcd c_mat(int m) const { return c_vec(m) * c_vec(m).adjoint(); }

  /// Throws ValidationError when an invariant is broken.
  void validate() const;

 private:
  MatrixXcd c_;
};

struct ChannelDraw {
  MatrixXcd h;
  MatrixXcd c;
  std::vector<std::string> warnings;
};

/// i.i.d. unit-variance Rayleigh channels; row r of h depends only on (seed, r).
ChannelDraw generate_channels(std::uint64_t seed, int k, int m, const ArrayGeometry& geometry);

/// Scatterer angles uniform in (-pi/3, pi/3); coefficients CN(0, 1) scaled by 0.01.
ExtendedTarget extended_trm(std::uint64_t seed, const ArrayGeometry& geometry, int n_scatterers);

/// Human-facing scenario parameters (dB at this boundary only).
struct ScenarioConfig {
  int n_tx = 16;
  int n_rx = 20;
  int k = 12;
  int m = 12;
  double p_dbm = 30.0;
  double sigma_c_dbm = 0.0;
  double sigma_r_dbm = 0.0;
  double beta = 0.5;
  double sinr_db = 8.0;
  double eh_mw = 0.1;
  int t_len = 64;
  Layout layout = Layout::separated;
  double theta_deg = 0.0;
  double alpha = 0.01;
  int n_scatterers = 5;

  Scenario build(std::uint64_t seed) const;
  /// Desk-scale variant: N_t=8, N_r=10, K=M=4.
  ScenarioConfig quick() const;
};

}  // namespace iscpt
