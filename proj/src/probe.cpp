#include "spdsheaf/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace spdsheaf {

ProbeResult linear_probe(const LabeledSet& train, const LabeledSet& test, const ProbeOptions& options) {
  if (train.size() == 0 || train.features.size() != train.labels.size() ||
      test.features.size() != test.labels.size()) {
    throw InvalidInput("linear_probe: malformed data set");
  }
  const std::set<int> classes(train.labels.begin(), train.labels.end());
  if (classes.size() < 2) throw InvalidInput("linear_probe: need at least two classes");
  if (*classes.begin() < 0) throw InvalidInput("linear_probe: labels must be non-negative");
  const int k = *classes.rbegin() + 1;
  const Index dim = train.features.front().size();
  const auto n = static_cast<Index>(train.size());

  MatrixXd x(n, dim);
  for (Index i = 0; i < n; ++i) {
    if (train.features[static_cast<std::size_t>(i)].size() != dim) {
      throw DimensionMismatch("linear_probe: inconsistent feature dimension");
    }
    x.row(i) = train.features[static_cast<std::size_t>(i)].transpose();
  }
  const VectorXd mean = x.colwise().mean().transpose();
  VectorXd scale = ((x.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().matrix().transpose();
  for (Index j = 0; j < dim; ++j) {
    if (!(scale(j) > 1e-12)) scale(j) = 1.0;
  }
  auto standardize = [&](const VectorXd& f) -> VectorXd {
    return ((f - mean).array() / scale.array()).matrix();
  };
  MatrixXd xs(n, dim + 1);
  for (Index i = 0; i < n; ++i) {
    xs.row(i).head(dim) = standardize(train.features[static_cast<std::size_t>(i)]).transpose();
    xs(i, dim) = 1.0;
  }
  MatrixXd y = MatrixXd::Zero(n, k);
  for (Index i = 0; i < n; ++i) y(i, train.labels[static_cast<std::size_t>(i)]) = 1.0;

  MatrixXd w = MatrixXd::Zero(dim + 1, k);
  for (int it = 0; it < options.iterations; ++it) {
    MatrixXd logits = xs * w;
    for (Index i = 0; i < n; ++i) {
      const double mx = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - mx).exp().matrix();
      logits.row(i) /= logits.row(i).sum();
    }
    MatrixXd grad = xs.transpose() * (logits - y) / static_cast<double>(n);
    grad.topRows(dim) += options.l2 * w.topRows(dim);
    w -= options.learning_rate * grad;
  }

  auto accuracy = [&](const LabeledSet& set) {
    if (set.size() == 0) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      VectorXd f(dim + 1);
      f.head(dim) = standardize(set.features[i]);
      f(dim) = 1.0;
      Index best = 0;
      (w.transpose() * f).maxCoeff(&best);
      if (best == set.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(set.size());
  };
  return {accuracy(train), accuracy(test)};
}

LabeledSet planarity_dataset(const PlanarityTask& task, const std::vector<LayerParams>& layers) {
  Rng rng(task.seed);
  LabeledSet set;
  const Eigen::Vector3d planar(task.spread, task.spread, task.planar_jitter);
  const Eigen::Vector3d isotropic = Eigen::Vector3d::Constant(task.spread);
  for (Index i = 0; i < 2 * task.samples_per_class; ++i) {
    const int label = static_cast<int>(i % 2);
    PointCloud cloud;
    cloud.points = random_cloud(task.points, label == 0 ? planar : isotropic, rng);
    cloud.edges = knn_graph(cloud.points, task.neighbors);
    const auto run = run_stream(cloud.topology(), geometric_input(cloud, task.canonicalize), layers);
    set.features.push_back(pooled_descriptor(run.states.back(), task.theta));
    set.labels.push_back(label);
  }
  if (task.shuffle_labels) std::shuffle(set.labels.begin(), set.labels.end(), rng);
  return set;
}

ProbeReport run_planarity_probe(const PlanarityTask& task, int repeats) {
  if (repeats < 1) throw InvalidInput("run_planarity_probe: repeats must be positive");
  ProbeReport report;
  for (int r = 0; r < repeats; ++r) {
    PlanarityTask t = task;
    t.seed = task.seed + static_cast<std::uint64_t>(r);
    const auto layers = random_layers(t.layers, 3, t.seed ^ 0x5eedULL);
    const LabeledSet all = planarity_dataset(t, layers);
    LabeledSet train;
    LabeledSet test;
    // Samples alternate classes, so an even/odd-pair split keeps both halves balanced.
    for (std::size_t i = 0; i < all.size(); ++i) {
      LabeledSet& dst = ((i / 2) % 2 == 0) ? train : test;
      dst.features.push_back(all.features[i]);
      dst.labels.push_back(all.labels[i]);
    }
    const auto res = linear_probe(train, test);
    report.train_accuracies.push_back(res.train_accuracy);
    report.test_accuracies.push_back(res.test_accuracy);
  }
  const auto count = static_cast<double>(repeats);
  report.mean_test = std::accumulate(report.test_accuracies.begin(), report.test_accuracies.end(), 0.0) / count;
  double var = 0.0;
  for (double a : report.test_accuracies) var += (a - report.mean_test) * (a - report.mean_test);
  report.sd_test = repeats > 1 ? std::sqrt(var / (count - 1.0)) : 0.0;
  return report;
}

}  // namespace spdsheaf
