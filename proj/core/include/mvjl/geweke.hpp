#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvjl/model.hpp"
#include "mvjl/sampler.hpp"

namespace mvjl {

/// Joint-distribution ("getting it right") test of the Gibbs sampler.
///
/// The marginal-conditional simulator draws theta from the prior and y given
/// theta, independently each time. The successive-conditional simulator
/// alternates one sweep of the sampler with a fresh y given theta. Both target
/// p(theta, y), so the means of every monitored statistic must agree.
struct GewekeOptions {
  int num_subjects = 3;
  int num_nodes = 4;
  int num_views = 2;
  int samples = 20000;
  int batches = 100;  // batch means for the successive-side standard error
  ModelConfig config = default_config();
  Fault fault = Fault::kNone;
  std::uint64_t seed = 20240611;

  /// Rank 2 with a noise-variance prior and inverse-Wishart dof large enough
  /// that every monitored statistic has a finite variance.
  static ModelConfig default_config();
};

struct GewekeStatistic {
  std::string name;
  double marginal_mean = 0.0;
  double marginal_se = 0.0;
  double successive_mean = 0.0;
  double successive_se = 0.0;
  double z = 0.0;
};

struct GewekeResult {
  std::vector<GewekeStatistic> statistics;
  double max_abs_z = 0.0;
};

/// Names of the monitored statistics, in result order.
std::vector<std::string> geweke_statistic_names(int num_views);

GewekeResult geweke_joint_test(const GewekeOptions& options);

}  // namespace mvjl
