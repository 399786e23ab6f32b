#pragma once

// Convex readout for pooled descriptors and the synthetic planarity task.

#include <cstdint>
#include <vector>

#include "spdsheaf/geom.hpp"

namespace spdsheaf {

struct LabeledSet {
  std::vector<VectorXd> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

struct ProbeOptions {
  int iterations = 2000;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Multinomial logistic regression on standardized features, trained by
/// full-batch gradient descent from zero weights (deterministic).
ProbeResult linear_probe(const LabeledSet& train, const LabeledSet& test, const ProbeOptions& options = {});

struct PlanarityTask {
  std::uint64_t seed = 42;
  Index samples_per_class = 200;
  Index points = 20;
  Index layers = 2;
  double theta = 0.5;
  double spread = 0.5;        ///< in-plane / isotropic standard deviation
  double planar_jitter = 0.02;  ///< out-of-plane standard deviation of class A
  Index neighbors = 4;        ///< k of the k-nearest-neighbour graph
  bool canonicalize = false;
  bool shuffle_labels = false;
};

/// Descriptors for both classes (0 = near-coplanar, 1 = isotropic), in sample order.
LabeledSet planarity_dataset(const PlanarityTask& task, const std::vector<LayerParams>& layers);

struct ProbeReport {
  std::vector<double> test_accuracies;  ///< one per repeat
  std::vector<double> train_accuracies;
  double mean_test = 0.0;
  double sd_test = 0.0;
};

/// `repeats` runs with seeds task.seed, task.seed + 1, ...; each run draws fresh
/// clouds and layer parameters and uses an even 50/50 train/test split.
ProbeReport run_planarity_probe(const PlanarityTask& task, int repeats = 3);

}  // namespace spdsheaf
