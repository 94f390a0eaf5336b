#pragma once

// Per-neuron kernel logistic regression in the dual: each neuron i learns
// alpha_i in R^P by full-batch gradient descent on
//
//   L(alpha_i) = -sum_nu [ y log s(h_nu) + (1 - y) log(1 - s(h_nu)) ]
//                + (lambda / 2) alpha_i^T K alpha_i,     h = K alpha_i.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "klrhop/kernel.hpp"

namespace klrhop {

struct TrainConfig {
  double learning_rate = 0.1;
  double weight_decay = 0.01;  // lambda
  int iterations = 500;

  void validate() const;
};

/// Raised when a neuron's dual vector picks up a NaN or infinity.
class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(std::size_t neuron, int iteration);
  std::size_t neuron() const { return neuron_; }
  int iteration() const { return iteration_; }

 private:
  std::size_t neuron_;
  int iteration_;
};

/// A trained network: the stored patterns and the P x N dual matrix. Column i
/// of alpha is the dual vector of neuron i.
struct DualWeights {
  PatternSet patterns;
  Eigen::MatrixXd alpha;
  KernelParams params;

  std::size_t n() const { return patterns.dimension(); }
  std::size_t p() const { return patterns.size(); }
};

/// P x N matrix of (xi_i^nu + 1) / 2.
Eigen::MatrixXd target_bits(const PatternSet& ps);

double sigmoid(double z);

double klr_loss(const Eigen::VectorXd& alpha_i, const Eigen::MatrixXd& gram,
                const Eigen::VectorXd& y_i, double lambda);

/// K (sigma(K alpha_i) - y_i) + lambda K alpha_i.
Eigen::VectorXd klr_gradient(const Eigen::VectorXd& alpha_i, const Eigen::MatrixXd& gram,
                             const Eigen::VectorXd& y_i, double lambda);

/// Reference single-neuron trainer: cfg.iterations fixed-step descent steps
/// from alpha = 0, written as plain loops. When loss_trace is given it
/// receives the loss before the first step and after every step.
Eigen::VectorXd train_neuron(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y_i,
                             const TrainConfig& cfg, std::size_t neuron_index = 0,
                             std::vector<double>* loss_trace = nullptr);

/// Trains all N neurons against one shared Gram matrix. Neurons are grouped
/// into fixed-width column blocks; each block runs as two GEMMs per step and
/// blocks are spread over OpenMP threads. The block layout does not depend
/// on the thread count, so the output is deterministic.
DualWeights train_network(const PatternSet& ps, const KernelParams& params,
                          const TrainConfig& cfg);

/// Calls train_neuron for each neuron in turn.
DualWeights train_network_serial(const PatternSet& ps, const KernelParams& params,
                                 const TrainConfig& cfg);

}  // namespace klrhop
