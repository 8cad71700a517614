#include "nvrotor/fock_oracle.hpp"

#include <cmath>

#include "nvrotor/constants.hpp"

namespace nvrotor {

ModeMatrices build_mode_matrices(double freq, double chi, int dim) {
  if (dim < 4) throw ConfigError("build_mode_matrices: dim must be >= 4");
  ModeMatrices m;
  m.dim = dim;
  m.lowering = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < dim; ++k) m.lowering(k - 1, k) = std::sqrt(double(k));
  Eigen::VectorXd n = Eigen::VectorXd::LinSpaced(dim, 0.0, double(dim - 1));
  m.h_up = (freq * n).asDiagonal();
  const Eigen::MatrixXd x = m.lowering + m.lowering.transpose();
  Eigen::MatrixXd x2 = x * x;
  x2 = 0.5 * (x2 + x2.transpose()).eval();  // keep Hermitian to roundoff
  m.h_down = m.h_up - 0.5 * chi * x2;
  return m;
}

Eigen::MatrixXcd propagator(const Eigen::MatrixXd& h, double tau) {
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + h.cwiseAbs().maxCoeff()))
    throw ConfigError("propagator: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success)
    throw ComputeError("propagator: eigendecomposition failed");
  const Eigen::VectorXcd ph =
      (cplx(0.0, -tau) * es.eigenvalues().cast<cplx>().array()).exp();
  return es.eigenvectors().cast<cplx>() * ph.asDiagonal() *
         es.eigenvectors().transpose().cast<cplx>();
}

double thermal_truncation_loss(double n_bar, int dim) {
  if (n_bar == 0.0) return 0.0;
  const double q = n_bar / (n_bar + 1.0);
  return std::pow(q, double(dim));
}

Eigen::VectorXd thermal_density(double n_bar, int dim) {
  if (n_bar < 0.0) throw ConfigError("thermal_density: n_bar must be >= 0");
  if (dim < 1) throw ConfigError("thermal_density: dim must be >= 1");
  const double loss = thermal_truncation_loss(n_bar, dim);
  if (loss > 1e-6)
    throw ComputeError("thermal_density: truncation weight loss " + std::to_string(loss) +
                       " exceeds 1e-6 at dim " + std::to_string(dim));
  Eigen::VectorXd w(dim);
  if (n_bar == 0.0) {
    w.setZero();
    w(0) = 1.0;
    return w;
  }
  const double q = n_bar / (n_bar + 1.0);
  double v = 1.0;
  for (int k = 0; k < dim; ++k) {
    w(k) = v;
    v *= q;
  }
  w /= w.sum();
  return w;
}

cplx echo_trace(const ModeMatrices& m, const Eigen::VectorXd& rho, double tau) {
  if (rho.size() != m.dim) throw ConfigError("echo_trace: shape mismatch");
  const Eigen::MatrixXcd uu = propagator(m.h_up, tau);
  const Eigen::MatrixXcd ud = propagator(m.h_down, tau);
  const Eigen::MatrixXcd op = ud.adjoint() * uu.adjoint() * ud * uu;
  cplx t{0.0, 0.0};
  for (int n = 0; n < m.dim; ++n) t += rho(n) * op(n, n);
  return t;
}

// ---------------------------------------------------------------------------
// fast tau-grid evaluator
// ---------------------------------------------------------------------------

ModeEchoEvaluator::ModeEchoEvaluator(double freq, double chi, int dim)
    : freq_(freq), chi_(chi), dim_(dim) {
  if (dim < 4) throw ConfigError("ModeEchoEvaluator: dim must be >= 4");
  for (int parity = 0; parity < 2; ++parity) {
    Block& b = blocks_[parity];
    for (int n = parity; n < dim; n += 2) b.levels.push_back(n);
    const int m = int(b.levels.size());
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) {
      const double n = b.levels[i];
      diag(i) = freq * n - 0.5 * chi * (2.0 * n + 1.0);
    }
    for (int i = 0; i + 1 < m; ++i) {
      const double n = b.levels[i];
      sub(i) = -0.5 * chi * std::sqrt((n + 1.0) * (n + 2.0));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
      throw ComputeError("ModeEchoEvaluator: tridiagonal eigendecomposition failed");
    b.evals = es.eigenvalues();
    b.evecs = es.eigenvectors();
  }
}

std::vector<cplx> ModeEchoEvaluator::trace_grid(double n_bar,
                                                const std::vector<double>& taus,
                                                double weight_cutoff) const {
  // thermal weights, truncated at weight_cutoff relative to the total
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim_);
  if (n_bar == 0.0) {
    w(0) = 1.0;
  } else {
    const double q = n_bar / (n_bar + 1.0);
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) {
      w(k) = v;
      v *= q;
    }
    w /= w.sum();
  }

  std::vector<cplx> out(taus.size(), cplx{0.0, 0.0});
  for (const Block& b : blocks_) {
    std::vector<int> sel;  // block-local indices with significant weight
    for (int i = 0; i < int(b.levels.size()); ++i)
      if (w(b.levels[i]) > weight_cutoff) sel.push_back(i);
    if (sel.empty()) continue;
    const int m = int(b.levels.size());
    const int s = int(sel.size());
    Eigen::MatrixXd rows(m, s);  // evecs rows of the selected initial levels
    for (int c = 0; c < s; ++c) rows.col(c) = b.evecs.row(sel[c]).transpose();

    for (std::size_t it = 0; it < taus.size(); ++it) {
      const double tau = taus[it];
      Eigen::ArrayXd cph(m), sph(m);
      for (int j = 0; j < m; ++j) {
        const double a = -b.evals(j) * tau;
        cph(j) = std::cos(a);
        sph(j) = std::sin(a);
      }
      // columns of U_down for each selected level: U(:,n) = V e^{-i evals tau} V(n,:)^T
      const Eigen::MatrixXd yr = rows.array().colwise() * cph;
      const Eigen::MatrixXd yi = rows.array().colwise() * sph;
      const Eigen::MatrixXd cr = b.evecs * yr;
      const Eigen::MatrixXd ci = b.evecs * yi;
      const Eigen::ArrayXd mag = cr.array().square() + ci.array().square() + 0.0;
      // sum_k e^{i freq k tau} |U_{k,n}|^2, then the e^{-i freq n tau} factor
      Eigen::ArrayXd ckr(m), cki(m);
      for (int k = 0; k < m; ++k) {
        const double a = freq_ * b.levels[k] * tau;
        ckr(k) = std::cos(a);
        cki(k) = std::sin(a);
      }
      for (int c = 0; c < s; ++c) {
        const Eigen::ArrayXd mc = mag.col(c);
        const double re = (mc * ckr).sum();
        const double im = (mc * cki).sum();
        const double an = freq_ * b.levels[sel[c]] * tau;
        const cplx down{std::cos(an), -std::sin(an)};
        out[it] += w(b.levels[sel[c]]) * down * cplx{re, im};
      }
    }
  }
  return out;
}

cplx ModeEchoEvaluator::trace(double n_bar, double tau, double weight_cutoff) const {
  return trace_grid(n_bar, {tau}, weight_cutoff).front();
}

namespace {

// per-mode dim ladder; stops when the grid-max change is below tol
struct ModeLadder {
  std::vector<cplx> trace;
  ConvergenceRecord record;
};

ModeLadder run_mode_ladder(double freq, double chi, double n_bar,
                           const std::vector<double>& taus, const OracleOptions& opts,
                           double tol_mode) {
  ModeLadder out;
  std::vector<cplx> prev;
  bool have_prev = false;
  for (int dim = opts.dim_start; dim <= opts.dim_cap; dim *= 2) {
    if (thermal_truncation_loss(n_bar, dim) > 1e-6) continue;  // ladder continues
    ModeEchoEvaluator ev(freq, chi, dim);
    std::vector<cplx> cur = ev.trace_grid(n_bar, taus, opts.weight_cutoff);
    out.record.dims_tried.push_back(dim);
    out.record.values.push_back(cur.back());
    out.record.final_dim = dim;
    if (have_prev) {
      double change = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i)
        change = std::max(change, std::abs(cur[i] - prev[i]));
      if (change < tol_mode) {
        out.record.converged = true;
        out.trace = std::move(cur);
        return out;
      }
    }
    prev = std::move(cur);
    have_prev = true;
  }
  out.record.converged = false;
  out.trace = std::move(prev);
  return out;
}

} // namespace

OracleTrace oracle_trace(const DispersiveRates& rates, const ThermalSpec& thermal,
                         const DephasingSpec& deph, const std::vector<double>& taus,
                         const OracleOptions& opts) {
  if (taus.empty()) throw ConfigError("oracle_trace: empty tau grid");
  if (opts.include_beta && !beta_mode_stable(rates))
    throw ComputeError("oracle_trace: beta mode unstable while include_beta is set");

  OracleTrace out;
  const double tol_mode = 0.5 * opts.tol;
  ModeLadder gamma =
      run_mode_ladder(rates.freq_gamma, rates.chi_gamma, thermal.n_gamma, taus, opts, tol_mode);
  out.gamma = gamma.record;

  std::vector<cplx> beta_trace(taus.size(), cplx{1.0, 0.0});
  if (opts.include_beta) {
    const double n_beta = resolve_n_beta(thermal, rates);
    ModeLadder beta =
        run_mode_ladder(rates.freq_beta, rates.chi_beta, n_beta, taus, opts, tol_mode);
    out.beta = beta.record;
    beta_trace = std::move(beta.trace);
  } else {
    out.beta.converged = true;
  }

  out.points.resize(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    ProbabilityPoint& p = out.points[i];
    p.tau = taus[i];
    p.overlap_gamma = gamma.trace[i];
    p.overlap_beta = beta_trace[i];
    const double half_re = 0.5 * std::real(p.overlap_beta * p.overlap_gamma);
    const double p0 = 0.5 + half_re;
    const double h = p0 - 0.5;
    p.p_up = 0.5 + std::exp(-2.0 * deph.gamma2 * p.tau) * h;
    p.p_down = 1.0 - p.p_up;
  }
  return out;
}

std::pair<ProbabilityPoint, ConvergenceRecord>
oracle_probability(const DispersiveRates& rates, const ThermalSpec& thermal,
                   const DephasingSpec& deph, double tau, bool include_beta,
                   double tol) {
  OracleOptions opts;
  opts.tol = tol;
  opts.include_beta = include_beta;
  const OracleTrace tr = oracle_trace(rates, thermal, deph, {tau}, opts);

  // combined-trace record at the requested tau
  ConvergenceRecord rec;
  rec.converged = tr.converged();
  rec.final_dim = std::max(tr.gamma.final_dim, tr.beta.final_dim);
  rec.dims_tried = tr.gamma.dims_tried;
  for (std::size_t i = 0; i < tr.gamma.values.size(); ++i) {
    cplx beta_v{1.0, 0.0};
    if (include_beta && !tr.beta.values.empty())
      beta_v = tr.beta.values[std::min(i, tr.beta.values.size() - 1)];
    rec.values.push_back(tr.gamma.values[i] * beta_v);
  }
  return {tr.points.front(), rec};
}

// ---------------------------------------------------------------------------
// factorization cross-check
// ---------------------------------------------------------------------------

namespace {

// exp(c a^dag^2) elementwise: E(m, j) = c^k sqrt(m!/j!)/k! with m = j + 2k.
// The truncated series terminates, so these are exact coefficients.
Eigen::MatrixXcd exp_raise_sq(cplx c, int dim) {
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(dim, dim);
  for (int j = 0; j < dim; ++j) {
    cplx ck{1.0, 0.0};
    for (int k = 1; 2 * k <= dim - 1 - j; ++k) {
      ck *= c;
      const int m = j + 2 * k;
      const double lg =
          0.5 * (std::lgamma(m + 1.0) - std::lgamma(j + 1.0)) - std::lgamma(k + 1.0);
      e(m, j) = ck * std::exp(lg);
    }
  }
  return e;
}

} // namespace

double verify_factorization(const Su11Factor& f, double freq, double chi,
                            double tau, int dim) {
  if (dim < 8) throw ConfigError("verify_factorization: dim must be >= 8");
  if (std::abs(f.eta) >= 1.0 / 3.0)
    throw ConvergenceError(
        "verify_factorization: |eta| >= 1/3, squeezed image of the compared "
        "block exceeds the truncation for every dim (series non-convergent)");

  // branch of denom^{-1/2} by continuity along tau from denom(0) = 1
  cplx s{1.0, 0.0};
  const int steps = std::max(int(64.0 * freq * tau / pi), 8);
  for (int i = 1; i <= steps; ++i) {
    const double t = tau * double(i) / double(steps);
    const Su11Factor ft = branch_factorization(freq, chi, t);
    const cplx r = 1.0 / std::sqrt(ft.denom);
    s = std::abs(r - s) <= std::abs(-r - s) ? r : -r;
  }

  const Eigen::MatrixXcd a_up = exp_raise_sq(0.5 * f.eta, dim);
  Eigen::VectorXcd mid(dim);
  const cplx s2 = s * s;
  cplx cur = s;  // s^{2n+1}
  for (int n = 0; n < dim; ++n) {
    mid(n) = cur;
    cur *= s2;
  }
  const Eigen::MatrixXcd product = a_up * mid.asDiagonal() * a_up.transpose();

  const ModeMatrices m = build_mode_matrices(freq, chi, dim);
  const Eigen::MatrixXcd u = propagator(m.h_down, tau);
  const double ph = 0.5 * freq * tau;
  const cplx phase{std::cos(ph), -std::sin(ph)};
  const int h = dim / 2;
  return (product.topLeftCorner(h, h) - phase * u.topLeftCorner(h, h))
      .cwiseAbs()
      .maxCoeff();
}

} // namespace nvrotor
