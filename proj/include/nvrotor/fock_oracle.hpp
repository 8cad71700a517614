#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "nvrotor/su11_echo.hpp"
#include "nvrotor/system_model.hpp"

namespace nvrotor {

// ---------------------------------------------------------------------------
// truncated number-basis matrices for one libration mode
// ---------------------------------------------------------------------------

struct ModeMatrices {
  int dim = 0;
  Eigen::MatrixXd h_up;      // freq * n_hat (rad/s), Hermitian
  Eigen::MatrixXd h_down;    // freq * n_hat - (chi/2)(a + a^dag)^2, Hermitian
  Eigen::MatrixXd lowering;  // a in the number basis
};

/// (a + a^dag)^2 is assembled from the truncated lowering matrix, so the
/// top corner carries the usual truncation artifacts on purpose.
ModeMatrices build_mode_matrices(double freq, double chi, int dim);

/// exp(-i h tau) via spectral decomposition of the dense Hermitian matrix.
Eigen::MatrixXcd propagator(const Eigen::MatrixXd& h, double tau);

/// Diagonal thermal weights proportional to (n/(n+1))^k, renormalized to unit
/// trace on the truncated space. Throws ComputeError when the discarded
/// weight exceeds 1e-6.
Eigen::VectorXd thermal_density(double n_bar, int dim);

/// Discarded Boltzmann weight outside the truncated space.
double thermal_truncation_loss(double n_bar, int dim);

/// Tr[U_down^dag U_up^dag U_down U_up rho] with rho the diagonal weights.
cplx echo_trace(const ModeMatrices& m, const Eigen::VectorXd& rho, double tau);

// ---------------------------------------------------------------------------
// convergence-controlled oracle
// ---------------------------------------------------------------------------

struct ConvergenceRecord {
  std::vector<int> dims_tried;
  std::vector<cplx> values;  // echo trace at the probe tau, one per dim tried
  bool converged = false;
  int final_dim = 0;
};

/// Spectral data of one mode at a fixed truncation, reusable across a tau
/// grid. h_down decomposes into even/odd parity blocks that are tridiagonal
/// in the compressed index; each block is diagonalized once.
class ModeEchoEvaluator {
 public:
  ModeEchoEvaluator(double freq, double chi, int dim);

  /// Tr[U_down^dag U_up^dag U_down U_up rho_th(n_bar)] at tau. Thermal
  /// weights below weight_cutoff (relative) are dropped.
  cplx trace(double n_bar, double tau, double weight_cutoff = 1e-9) const;

  /// Batched version sharing the spectral data over the whole grid.
  std::vector<cplx> trace_grid(double n_bar, const std::vector<double>& taus,
                               double weight_cutoff = 1e-9) const;

  int dim() const { return dim_; }

 private:
  struct Block {
    std::vector<int> levels;
    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
  };
  double freq_ = 0.0;
  double chi_ = 0.0;
  int dim_ = 0;
  Block blocks_[2];
};

struct OracleOptions {
  double tol = 1e-6;   // stop when the echo trace changes by less than this
  int dim_start = 32;
  int dim_cap = 4096;
  bool include_beta = true;
  double weight_cutoff = 1e-9;
};

struct OracleTrace {
  std::vector<ProbabilityPoint> points;
  ConvergenceRecord gamma;
  ConvergenceRecord beta;  // untouched when include_beta is false
  bool converged() const { return gamma.converged && beta.converged; }
};

/// Doubles each mode's truncation (start -> cap) until its echo trace is
/// stable over the whole tau grid; combines modes multiplicatively and
/// applies the dephasing factor. Dims whose thermal truncation loss exceeds
/// 1e-6 are skipped and the ladder continues. Non-convergence at the cap is
/// reported through the records, never silently accepted.
OracleTrace oracle_trace(const DispersiveRates& rates, const ThermalSpec& thermal,
                         const DephasingSpec& deph, const std::vector<double>& taus,
                         const OracleOptions& opts = {});

/// Single-tau oracle per the module contract. The record's values hold the
/// combined echo trace at each dim tried.
std::pair<ProbabilityPoint, ConvergenceRecord>
oracle_probability(const DispersiveRates& rates, const ThermalSpec& thermal,
                   const DephasingSpec& deph, double tau, bool include_beta,
                   double tol);

// ---------------------------------------------------------------------------
// factorization cross-check
// ---------------------------------------------------------------------------

/// Builds U_down two ways -- spectral exponential of h_down, and the
/// three-factor normal-ordered product (with the e^{-i freq tau/2} relative
/// phase) assembled from exact truncated-series elements -- and returns the
/// max elementwise deviation on the lowest dim/2 x dim/2 block.
/// Throws ConvergenceError outside the convergent regime |eta| < 1/3, where
/// the squeezed image of the compared block cannot fit the truncation.
double verify_factorization(const Su11Factor& f, double freq, double chi,
                            double tau, int dim);

} // namespace nvrotor
