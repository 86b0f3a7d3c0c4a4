#include "eegclean/ica.hpp"

#include "eegclean/errors.hpp"
#include "eegclean/util.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace eegclean {

namespace {

// E[log cosh X] for X ~ N(0,1); distance from it measures non-Gaussianity.
constexpr double kGaussLogCosh = 0.374567207491438;
constexpr double kNonGaussianityFloor = 0.01;

// M <- (M M^T)^{-1/2} M, the symmetric decorrelation step.
Eigen::MatrixXd sym_decorrelate(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose());
  const Eigen::VectorXd& vals = es.eigenvalues();
  if (vals.minCoeff() <= 0.0) {
    throw std::runtime_error("ica: degenerate unmixing estimate during decorrelation");
  }
  const Eigen::MatrixXd inv_sqrt = es.eigenvectors() *
                                   vals.cwiseSqrt().cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();
  return inv_sqrt * m;
}

std::vector<int> sorted_unique_rejected(const std::vector<int>& rejected, int k) {
  std::set<int> s(rejected.begin(), rejected.end());
  for (int r : s) {
    if (r < 0 || r >= k) {
      throw std::out_of_range("reconstruct: component index " + std::to_string(r) +
                              " out of range [0, " + std::to_string(k) + ")");
    }
  }
  return {s.begin(), s.end()};
}

}  // namespace

WhitenResult whiten(const Eigen::MatrixXd& x) {
  if (x.cols() < 2) throw std::invalid_argument("whiten: need at least 2 samples");
  const Eigen::Index n = x.rows();
  const double t = static_cast<double>(x.cols());

  WhitenResult res;
  res.mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - res.mean;
  const Eigen::MatrixXd cov = centered * centered.transpose() / (t - 1.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd& vals = es.eigenvalues();  // ascending
  const double lambda_max = vals[n - 1];
  if (!(lambda_max > 0.0)) throw std::runtime_error("whiten: input has rank 0");

  const double threshold = 1e-10 * lambda_max;
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (vals[i] > threshold) ++k;
  }

  // Retained directions in descending eigenvalue order.
  res.whitener.resize(k, n);
  res.dewhitener.resize(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index src = n - 1 - j;
    const double root = std::sqrt(vals[src]);
    res.whitener.row(j) = es.eigenvectors().col(src).transpose() / root;
    res.dewhitener.col(j) = es.eigenvectors().col(src) * root;
  }
  res.z = res.whitener * centered;
  return res;
}

IcaModel fastica(const Eigen::MatrixXd& x, const IcaOptions& opts,
                 std::vector<std::string> channel_labels) {
  const Eigen::Index n = x.rows();
  if (!channel_labels.empty() && static_cast<Eigen::Index>(channel_labels.size()) != n) {
    throw std::invalid_argument("ica: label count does not match channel count");
  }
  if (channel_labels.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) channel_labels.push_back("c" + std::to_string(i));
  }

  WhitenResult wh = whiten(x);
  const Eigen::Index k = wh.whitener.rows();
  const double t = static_cast<double>(x.cols());

  std::mt19937 rng(opts.seed);
  Eigen::MatrixXd b(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) b(i, j) = gaussian(rng);
  }
  b = sym_decorrelate(b);

  IcaConvergence conv;
  conv.final_deltas = Eigen::VectorXd::Ones(k);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Eigen::MatrixXd u = b * wh.z;                       // k x T
    const Eigen::MatrixXd g = u.array().tanh().matrix();     // contrast
    const Eigen::VectorXd g_prime_mean =
        (1.0 - g.array().square()).rowwise().mean().matrix();
    Eigen::MatrixXd b_new =
        (g * wh.z.transpose()) / t - g_prime_mean.asDiagonal() * b;
    b_new = sym_decorrelate(b_new);

    conv.final_deltas =
        (1.0 - (b_new * b.transpose()).diagonal().array().abs()).matrix();
    conv.iterations = it;
    b = std::move(b_new);
    if (conv.final_deltas.maxCoeff() < opts.tol) {
      conv.converged = true;
      break;
    }
  }

  IcaModel model;
  model.channel_labels = std::move(channel_labels);
  model.mean = wh.mean;
  model.whitener = wh.whitener;
  model.unmixing = b * wh.whitener;          // k x n
  model.mixing = wh.dewhitener * b.transpose();  // exact pseudo-inverse
  model.n_components = static_cast<int>(k);
  model.seed = opts.seed;
  model.convergence = std::move(conv);

  // Canonical order: descending power delivered to the channels per
  // unit-variance component; stable on ties.
  std::vector<Eigen::Index> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd power(k);
  for (Eigen::Index j = 0; j < k; ++j) power[j] = model.mixing.col(j).squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index c) { return power[a] > power[c]; });

  IcaModel out = model;
  for (Eigen::Index j = 0; j < k; ++j) {
    out.unmixing.row(j) = model.unmixing.row(order[static_cast<size_t>(j)]);
    out.mixing.col(j) = model.mixing.col(order[static_cast<size_t>(j)]);
    out.convergence.final_deltas[j] =
        model.convergence.final_deltas[order[static_cast<size_t>(j)]];
  }

  // Sign convention: the largest-magnitude entry of each unmixing row is
  // positive.
  for (Eigen::Index j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    out.unmixing.row(j).cwiseAbs().maxCoeff(&arg);
    if (out.unmixing(j, arg) < 0.0) {
      out.unmixing.row(j) = -out.unmixing.row(j);
      out.mixing.col(j) = -out.mixing.col(j);
    }
  }

  // Reliability: symmetric FastICA also "converges" on Gaussian inputs
  // (every rotation is a fixed point), so measure how non-Gaussian each
  // training component actually is.
  const Eigen::MatrixXd comps = out.unmixing * (x.colwise() - out.mean);
  // log cosh u == |u| + log1p(exp(-2|u|)) - log 2, overflow-safe.
  const Eigen::ArrayXXd a = comps.array().abs();
  out.convergence.nongaussianity =
      ((a + (-2.0 * a).exp().log1p() - M_LN2).rowwise().mean() - kGaussLogCosh)
          .abs()
          .matrix();
  out.convergence.reliable =
      out.convergence.converged &&
      out.convergence.nongaussianity.minCoeff() >= kNonGaussianityFloor;
  return out;
}

Components apply_unmixing(const IcaModel& model, const Recording& rec) {
  const Eigen::Index n = static_cast<Eigen::Index>(model.channel_labels.size());
  std::vector<Eigen::Index> rows;
  std::vector<std::string> missing;
  for (const auto& l : model.channel_labels) {
    const Eigen::Index idx = rec.channel_index(l);
    if (idx < 0) {
      missing.push_back(l);
    } else {
      rows.push_back(idx);
    }
  }
  if (!missing.empty()) {
    std::string msg = "apply_unmixing: recording lacks model channels:";
    for (const auto& m : missing) msg += " " + m;
    throw std::invalid_argument(msg);
  }

  Components comps;
  comps.model = model;
  comps.trials.reserve(rec.trials.size());
  for (const auto& trial : rec.trials) {
    Eigen::MatrixXd sel(n, trial.cols());
    for (Eigen::Index r = 0; r < n; ++r) sel.row(r) = trial.row(rows[static_cast<size_t>(r)]);
    comps.trials.push_back(model.unmixing * (sel.colwise() - model.mean));
  }
  return comps;
}

namespace {

Recording rebuild_channels(const Components& comps, const Recording& original,
                           const std::vector<Eigen::MatrixXd>& gated_sources) {
  const IcaModel& model = comps.model;
  if (original.trials.size() != gated_sources.size()) {
    throw std::invalid_argument("reconstruct: trial count mismatch with original recording");
  }
  std::vector<Eigen::Index> rows;
  for (const auto& l : model.channel_labels) {
    const Eigen::Index idx = original.channel_index(l);
    if (idx < 0) {
      throw std::invalid_argument("reconstruct: original recording lacks model channel '" + l +
                                  "'");
    }
    rows.push_back(idx);
  }

  Recording out = original;
  for (size_t t = 0; t < gated_sources.size(); ++t) {
    if (gated_sources[t].cols() != original.trials[t].cols()) {
      throw std::invalid_argument("reconstruct: trial " + std::to_string(t) +
                                  " length mismatch with original recording");
    }
    const Eigen::MatrixXd rebuilt =
        (model.mixing * gated_sources[t]).colwise() + model.mean;
    for (size_t r = 0; r < rows.size(); ++r) {
      out.trials[t].row(rows[r]) = rebuilt.row(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

}  // namespace

Recording reconstruct(const Components& comps, const Recording& original,
                      const std::vector<int>& rejected) {
  const auto rej = sorted_unique_rejected(rejected, comps.model.n_components);
  std::vector<Eigen::MatrixXd> gated = comps.trials;
  for (auto& trial : gated) {
    for (int r : rej) trial.row(r).setZero();
  }
  return rebuild_channels(comps, original, gated);
}

Recording reconstruct_partial(const Components& comps, const Recording& original,
                              const std::vector<int>& rejected, const Msf& msf) {
  const auto rej = sorted_unique_rejected(rejected, comps.model.n_components);
  if (msf.trials.size() != comps.trials.size()) {
    throw std::invalid_argument("reconstruct_partial: msf has " +
                                std::to_string(msf.trials.size()) + " trials, components have " +
                                std::to_string(comps.trials.size()));
  }
  std::vector<Eigen::MatrixXd> gated = comps.trials;
  for (size_t t = 0; t < gated.size(); ++t) {
    if (msf.trials[t].size() != gated[t].cols()) {
      throw std::invalid_argument("reconstruct_partial: msf trial " + std::to_string(t) +
                                  " length mismatch");
    }
    const Eigen::ArrayXd keep = 1.0 - msf.trials[t].array();
    for (int r : rej) gated[t].row(r).array() *= keep.transpose();
  }
  return rebuild_channels(comps, original, gated);
}

void save_ica(const IcaModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("ica: cannot write '" + path + "'");
  const Eigen::Index n = static_cast<Eigen::Index>(model.channel_labels.size());
  const Eigen::Index k = model.n_components;

  f << "eegclean-ica v1\n";
  f << "n_channels " << n << "\n";
  f << "n_components " << k << "\n";
  f << "seed " << model.seed << "\n";
  f << "converged " << (model.convergence.converged ? 1 : 0) << "\n";
  f << "reliable " << (model.convergence.reliable ? 1 : 0) << "\n";
  f << "iterations " << model.convergence.iterations << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    f << "label " << i << " " << model.channel_labels[static_cast<size_t>(i)] << "\n";
  }
  auto write_row = [&](const char* tag, Eigen::Index idx, const auto& row) {
    f << tag;
    if (idx >= 0) f << " " << idx;
    for (Eigen::Index j = 0; j < row.size(); ++j) f << " " << format_double(row[j]);
    f << "\n";
  };
  write_row("mean", -1, model.mean);
  if (model.convergence.nongaussianity.size() == k) {
    write_row("nongaussianity", -1, model.convergence.nongaussianity);
  }
  for (Eigen::Index i = 0; i < k; ++i) write_row("whitener", i, model.whitener.row(i));
  for (Eigen::Index i = 0; i < k; ++i) write_row("unmixing", i, model.unmixing.row(i));
  for (Eigen::Index i = 0; i < n; ++i) write_row("mixing", i, model.mixing.row(i));
  if (!f) throw io_error("ica: write to '" + path + "' failed");
}

IcaModel load_ica(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("ica: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(f, line) || trim(line) != "eegclean-ica v1") {
    throw io_error("ica: '" + path + "' is not an eegclean ica model file");
  }

  IcaModel model;
  Eigen::Index n = -1;
  Eigen::Index k = -1;
  auto parse_row = [&](std::istringstream& iss, Eigen::Index len) {
    Eigen::VectorXd row(len);
    std::string cell;
    for (Eigen::Index j = 0; j < len; ++j) {
      if (!(iss >> cell)) throw io_error("ica: truncated matrix row in '" + path + "'");
      row[j] = parse_double_strict(cell);
    }
    return row;
  };

  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    std::istringstream iss(line);
    std::string tag;
    iss >> tag;
    if (tag == "n_channels") {
      iss >> n;
      model.channel_labels.assign(static_cast<size_t>(n), "");
      model.mean.resize(n);
    } else if (tag == "n_components") {
      iss >> k;
      model.n_components = static_cast<int>(k);
      if (n < 0) throw io_error("ica: n_components before n_channels in '" + path + "'");
      model.whitener.resize(k, n);
      model.unmixing.resize(k, n);
      model.mixing.resize(n, k);
    } else if (tag == "seed") {
      iss >> model.seed;
    } else if (tag == "converged") {
      int v = 0;
      iss >> v;
      model.convergence.converged = v != 0;
    } else if (tag == "reliable") {
      int v = 0;
      iss >> v;
      model.convergence.reliable = v != 0;
    } else if (tag == "iterations") {
      iss >> model.convergence.iterations;
    } else if (tag == "nongaussianity") {
      if (k < 0) throw io_error("ica: nongaussianity before n_components in '" + path + "'");
      model.convergence.nongaussianity = parse_row(iss, k);
    } else if (tag == "label") {
      Eigen::Index i = -1;
      iss >> i;
      std::string rest;
      std::getline(iss, rest);
      if (i < 0 || i >= n) throw io_error("ica: label index out of range in '" + path + "'");
      model.channel_labels[static_cast<size_t>(i)] = trim(rest);
    } else if (tag == "mean") {
      model.mean = parse_row(iss, n);
    } else if (tag == "whitener" || tag == "unmixing" || tag == "mixing") {
      Eigen::Index i = -1;
      iss >> i;
      const Eigen::Index len = (tag == "mixing") ? k : n;
      const Eigen::Index rows = (tag == "mixing") ? n : k;
      if (i < 0 || i >= rows) throw io_error("ica: row index out of range in '" + path + "'");
      const Eigen::VectorXd row = parse_row(iss, len);
      if (tag == "whitener") model.whitener.row(i) = row;
      if (tag == "unmixing") model.unmixing.row(i) = row;
      if (tag == "mixing") model.mixing.row(i) = row;
    } else {
      throw io_error("ica: unknown tag '" + tag + "' in '" + path + "'");
    }
  }
  if (n < 0 || k < 0) throw io_error("ica: '" + path + "' is missing dimensions");
  model.convergence.final_deltas = Eigen::VectorXd::Zero(k);
  return model;
}

}  // namespace eegclean
