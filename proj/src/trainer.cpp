#include "klrhop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace klrhop {

namespace {

constexpr double kLogFloor = 1e-12;
constexpr Eigen::Index kNeuronBlock = 64;

void check_shapes(const Eigen::VectorXd& alpha_i, const Eigen::MatrixXd& gram,
                  const Eigen::VectorXd& y_i) {
  if (gram.rows() != gram.cols() || alpha_i.size() != gram.rows() || y_i.size() != gram.rows()) {
    throw DimensionError("klr: alpha (" + std::to_string(alpha_i.size()) + "), gram (" +
                         std::to_string(gram.rows()) + "x" + std::to_string(gram.cols()) +
                         ") and targets (" + std::to_string(y_i.size()) + ") disagree");
  }
}

bool all_finite(const double* v, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw std::invalid_argument("weight decay must be non-negative");
  }
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
}

TrainingDivergedError::TrainingDivergedError(std::size_t neuron, int iteration)
    : std::runtime_error("training diverged for neuron " + std::to_string(neuron) +
                         " (non-finite dual variable after iteration " +
                         std::to_string(iteration) + ")"),
      neuron_(neuron),
      iteration_(iteration) {}

Eigen::MatrixXd target_bits(const PatternSet& ps) {
  Eigen::MatrixXd y(ps.size(), ps.dimension());
  for (std::size_t mu = 0; mu < ps.size(); ++mu) {
    for (std::size_t i = 0; i < ps.dimension(); ++i) {
      y(mu, i) = ps[mu][i] > 0 ? 1.0 : 0.0;
    }
  }
  return y;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double klr_loss(const Eigen::VectorXd& alpha_i, const Eigen::MatrixXd& gram,
                const Eigen::VectorXd& y_i, double lambda) {
  check_shapes(alpha_i, gram, y_i);
  const Eigen::VectorXd h = gram * alpha_i;
  double nll = 0.0;
  for (Eigen::Index nu = 0; nu < h.size(); ++nu) {
    const double s = sigmoid(h[nu]);
    nll -= y_i[nu] * std::log(std::max(s, kLogFloor)) +
           (1.0 - y_i[nu]) * std::log(std::max(1.0 - s, kLogFloor));
  }
  const double loss = nll + 0.5 * lambda * alpha_i.dot(h);
  if (!std::isfinite(loss)) throw std::runtime_error("klr loss is not finite");
  return loss;
}

Eigen::VectorXd klr_gradient(const Eigen::VectorXd& alpha_i, const Eigen::MatrixXd& gram,
                             const Eigen::VectorXd& y_i, double lambda) {
  check_shapes(alpha_i, gram, y_i);
  const Eigen::VectorXd h = gram * alpha_i;
  Eigen::VectorXd r(h.size());
  for (Eigen::Index nu = 0; nu < h.size(); ++nu) {
    r[nu] = sigmoid(h[nu]) - y_i[nu] + lambda * alpha_i[nu];
  }
  Eigen::VectorXd g = gram * r;
  if (!all_finite(g.data(), g.size())) throw std::runtime_error("klr gradient is not finite");
  return g;
}

Eigen::VectorXd train_neuron(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y_i,
                             const TrainConfig& cfg, std::size_t neuron_index,
                             std::vector<double>* loss_trace) {
  cfg.validate();
  const Eigen::Index p = gram.rows();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(p);
  check_shapes(alpha, gram, y_i);

  std::vector<double> h(p), r(p);
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(klr_loss(alpha, gram, y_i, cfg.weight_decay));
  }
  for (int it = 0; it < cfg.iterations; ++it) {
    for (Eigen::Index nu = 0; nu < p; ++nu) {
      double acc = 0.0;
      for (Eigen::Index mu = 0; mu < p; ++mu) acc += gram(nu, mu) * alpha[mu];
      h[nu] = acc;
    }
    for (Eigen::Index nu = 0; nu < p; ++nu) {
      r[nu] = sigmoid(h[nu]) - y_i[nu] + cfg.weight_decay * alpha[nu];
    }
    for (Eigen::Index mu = 0; mu < p; ++mu) {
      double g = 0.0;
      for (Eigen::Index nu = 0; nu < p; ++nu) g += gram(mu, nu) * r[nu];
      alpha[mu] -= cfg.learning_rate * g;
    }
    if (!all_finite(alpha.data(), p)) throw TrainingDivergedError(neuron_index, it + 1);
    if (loss_trace) loss_trace->push_back(klr_loss(alpha, gram, y_i, cfg.weight_decay));
  }
  return alpha;
}

DualWeights train_network(const PatternSet& ps, const KernelParams& params,
                          const TrainConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd gram = gram_matrix(ps, params);
  const Eigen::MatrixXd y = target_bits(ps);
  const auto p = static_cast<Eigen::Index>(ps.size());
  const auto n = static_cast<Eigen::Index>(ps.dimension());
  const Eigen::Index blocks = (n + kNeuronBlock - 1) / kNeuronBlock;

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(p, n);
  // First failing neuron per block; reported after the parallel region.
  std::vector<Eigen::Index> failed(blocks, -1);
  std::vector<int> failed_at(blocks, 0);

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index first = b * kNeuronBlock;
    const Eigen::Index width = std::min(kNeuronBlock, n - first);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, width);
    const auto yb = y.middleCols(first, width);
    Eigen::MatrixXd h(p, width), r(p, width);
    for (int it = 0; it < cfg.iterations; ++it) {
      h.noalias() = gram * a;
      for (Eigen::Index c = 0; c < width; ++c) {
        for (Eigen::Index nu = 0; nu < p; ++nu) {
          r(nu, c) = sigmoid(h(nu, c)) - yb(nu, c) + cfg.weight_decay * a(nu, c);
        }
      }
      a.noalias() -= cfg.learning_rate * (gram * r);
      if (!all_finite(a.data(), a.size())) {
        for (Eigen::Index c = 0; c < width && failed[b] < 0; ++c) {
          if (!all_finite(a.col(c).data(), p)) failed[b] = first + c;
        }
        failed_at[b] = it + 1;
        break;
      }
    }
    alpha.middleCols(first, width) = a;
  }

  for (Eigen::Index b = 0; b < blocks; ++b) {
    if (failed[b] >= 0) {
      throw TrainingDivergedError(static_cast<std::size_t>(failed[b]), failed_at[b]);
    }
  }
  return DualWeights{ps, std::move(alpha), params};
}

DualWeights train_network_serial(const PatternSet& ps, const KernelParams& params,
                                 const TrainConfig& cfg) {
  const Eigen::MatrixXd gram = gram_matrix_serial(ps, params);
  const Eigen::MatrixXd y = target_bits(ps);
  Eigen::MatrixXd alpha(ps.size(), ps.dimension());
  for (std::size_t i = 0; i < ps.dimension(); ++i) {
    alpha.col(static_cast<Eigen::Index>(i)) =
        train_neuron(gram, y.col(static_cast<Eigen::Index>(i)), cfg, i);
  }
  return DualWeights{ps, std::move(alpha), params};
}

}  // namespace klrhop
