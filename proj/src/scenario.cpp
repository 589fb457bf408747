#include "iscpt/scenario.hpp"

#include "iscpt/rng.hpp"

namespace iscpt {

std::string to_string(Layout layout) {
  return layout == Layout::colocated ? "colocated" : "separated";
}

Layout layout_from_string(const std::string& s) {
  if (s == "separated") return Layout::separated;
  if (s == "colocated" || s == "co-located") return Layout::colocated;
  throw ValidationError("unknown layout '" + s + "'");
}

void Scenario::validate() const {
  if (h.cols() != geometry.n_tx) throw ValidationError("IR channel width must equal n_tx");
  if (k() < 1) throw ValidationError("need at least one information receiver");
  if (eta.size() != k()) throw ValidationError("one SINR threshold per IR required");
  if (layout == Layout::separated && c_.rows() > 0 && c_.cols() != geometry.n_tx)
    throw ValidationError("ER channel width must equal n_tx");
  if (beta.size() != m() || q.size() != m())
    throw ValidationError("one EH coefficient and threshold per ER required");
  if (!(p_budget > 0)) throw ValidationError("power budget must be positive");
  if (!(sigma_c2 > 0) || !(sigma_r2 > 0)) throw ValidationError("noise powers must be positive");
  if ((eta.array() < 0).any() || (q.array() < 0).any())
    throw ValidationError("thresholds must be nonnegative");
  if ((beta.array() < 0).any() || (beta.array() > 1).any())
    throw ValidationError("EH coefficients must lie in [0, 1]");
  if (t_len < 1) throw ValidationError("symbol count must be positive");
}

ChannelDraw generate_channels(std::uint64_t seed, int k, int m, const ArrayGeometry& geometry) {
  if (k < 1 || m < 0) throw ValidationError("generate_channels: need k >= 1 and m >= 0");
  ChannelDraw out;
  ComplexGaussian ir(seed, Stream::ir_channels);
  ComplexGaussian er(seed, Stream::er_channels);
  out.h = ir.matrix(k, geometry.n_tx);
  out.c = er.matrix(m, geometry.n_tx);
  if (k + m >= geometry.n_tx)
    out.warnings.push_back("k + m >= n_tx: receivers outnumber transmit antennas");
  return out;
}

ExtendedTarget extended_trm(std::uint64_t seed, const ArrayGeometry& geometry, int n_scatterers) {
  if (n_scatterers < 1) throw ValidationError("extended_trm: need at least one scatterer");
  ComplexGaussian src(seed, Stream::scatterers);
  ExtendedTarget t;
  t.n_scatterers = n_scatterers;
  t.g = MatrixXcd::Zero(geometry.n_rx, geometry.n_tx);
  for (int n = 0; n < n_scatterers; ++n) {
    const double theta = (src.uniform() * 2.0 - 1.0) * kPi / 3.0;
    const cd alpha = 0.01 * src();
    t.thetas.push_back(theta);
    t.alphas.push_back(alpha);
    t.g += alpha * response_pair(geometry, theta).a_mat;
  }
  return t;
}

Scenario ScenarioConfig::build(std::uint64_t seed) const {
  Scenario s;
  s.geometry = ArrayGeometry(n_tx, n_rx);
  s.layout = layout;
  const int m_eff = layout == Layout::colocated ? k : m;
  ChannelDraw draw = generate_channels(seed, k, layout == Layout::colocated ? 0 : m, s.geometry);
  s.h = std::move(draw.h);
  if (layout == Layout::separated) s.set_er_channels(std::move(draw.c));
  s.eta = VectorXd::Constant(k, db_to_linear(sinr_db));
  s.q = VectorXd::Constant(m_eff, eh_mw);
  s.beta = VectorXd::Constant(m_eff, beta);
  s.p_budget = dbm_to_mw(p_dbm);
  s.sigma_c2 = dbm_to_mw(sigma_c_dbm);
  s.sigma_r2 = dbm_to_mw(sigma_r_dbm);
  s.t_len = t_len;
  s.validate();
  return s;
}

ScenarioConfig ScenarioConfig::quick() const {
  ScenarioConfig c = *this;
  c.n_tx = 8;
  c.n_rx = 10;
  c.k = 4;
  c.m = 4;
  return c;
}

}  // namespace iscpt
