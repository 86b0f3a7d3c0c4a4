#pragma once

#include "eegclean/msf.hpp"
#include "eegclean/recording.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eegclean {

struct IcaOptions {
  std::uint32_t seed = 42;
  int max_iter = 500;
  double tol = 1e-6;  // on 1 - |diag(W_new * W_old^T)|
};

struct IcaConvergence {
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd final_deltas;  // per component, at the last sweep
  // Per-component |E[log cosh u] - E[log cosh gaussian]| on the training
  // data. Near-zero means the component is close to Gaussian and its
  // rotation is not determined; `reliable` requires convergence and every
  // component to clear a small floor.
  Eigen::VectorXd nongaussianity;
  bool reliable = false;
};

// Result of a FastICA fit over a set of channels. components = unmixing *
// (X - mean); mixing is the Moore-Penrose pseudo-inverse of unmixing, so
// unmixing * mixing == I_k.
struct IcaModel {
  std::vector<std::string> channel_labels;  // the n decomposed channels
  Eigen::VectorXd mean;                     // n, training mean in uV
  Eigen::MatrixXd whitener;                 // k x n
  Eigen::MatrixXd unmixing;                 // k x n
  Eigen::MatrixXd mixing;                   // n x k
  int n_components = 0;
  std::uint32_t seed = 0;
  IcaConvergence convergence;
};

// Per-trial component time courses, bundled with the model that produced
// them so reconstruction has the unmixing context at hand.
struct Components {
  IcaModel model;
  std::vector<Eigen::MatrixXd> trials;  // each k x n_samples_t
};

struct WhitenResult {
  Eigen::MatrixXd z;           // k x T, identity covariance
  Eigen::MatrixXd whitener;    // k x n
  Eigen::MatrixXd dewhitener;  // n x k, pseudo-inverse of whitener
  Eigen::VectorXd mean;        // n
};

// PCA whitening. k is the count of covariance eigenvalues above
// 1e-10 * lambda_max; throws on rank-0 input.
WhitenResult whiten(const Eigen::MatrixXd& x);

// Symmetric fixed-point FastICA with tanh contrast and symmetric
// decorrelation each sweep. Deterministic for a fixed seed. Non-convergence
// is reported in the convergence record, not thrown. Components are ordered
// by descending channel-space power (mixing column norm) and sign-fixed so
// each unmixing row's largest-magnitude entry is positive.
IcaModel fastica(const Eigen::MatrixXd& x, const IcaOptions& opts = {},
                 std::vector<std::string> channel_labels = {});

// components = unmixing * (X - mean) per trial, using the training mean.
// rec must contain every model channel.
Components apply_unmixing(const IcaModel& model, const Recording& rec);

// Rebuild channels as mixing * S' + mean with the rejected component rows
// zeroed everywhere. Channels not in the model (EOG among them) pass through
// from `original` unchanged.
Recording reconstruct(const Components& comps, const Recording& original,
                      const std::vector<int>& rejected);

// Gated variant: rejected rows are scaled by (1 - msf weight) per sample, so
// binary weights zero them exactly where msf == 1 and fractional weights
// attenuate proportionally.
Recording reconstruct_partial(const Components& comps, const Recording& original,
                              const std::vector<int>& rejected, const Msf& msf);

// Plain-text model serialization, round-trip exact.
void save_ica(const IcaModel& model, const std::string& path);
IcaModel load_ica(const std::string& path);

}  // namespace eegclean
