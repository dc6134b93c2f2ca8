// Copyright 2026 The boxdeform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// (mu/mu_w, lambda)-CMA-ES with an ask/tell interface.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace boxdeform {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Population size for dimension n: 4 + floor(3 ln n).
int default_population(int n);

class CmaEs {
 public:
  // Throws InvalidArgument for n < 1, sigma0 <= 0 or lambda < 2.
  CmaEs(const VecX& mean0, double sigma0, std::uint64_t seed,
        std::optional<int> lambda = std::nullopt);

  // lambda samples m + sigma * B * D * z.
  std::vector<VecX> ask();

  // Fitnesses are minimized. Non-finite values rank last; ties go to the
  // lower candidate index.
  void tell(const std::vector<VecX>& candidates,
            const std::vector<double>& fitness);

  // Best candidate ever told. Throws StageError before the first tell.
  std::pair<VecX, double> best() const;
  bool has_best() const { return best_f_.has_value(); }

  int dimension() const { return n_; }
  int lambda() const { return lambda_; }
  int mu() const { return mu_; }
  const VecX& weights() const { return weights_; }
  double mu_eff() const { return mu_eff_; }
  const VecX& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  const MatX& covariance() const { return C_; }
  const VecX& eigenvalues() const { return eigvals_; }
  int generation() const { return generation_; }
  long evaluations() const { return evaluations_; }
  int eigen_interval() const { return eigen_interval_; }
  int condition_clamps() const { return condition_clamps_; }

  // Equality of everything that drives future sampling (ignores the
  // recorded best fitness value).
  bool same_search_state(const CmaEs& other) const;

 private:
  void update_eigensystem();

  int n_, lambda_, mu_;
  VecX weights_;
  double mu_eff_, c_sigma_, d_sigma_, c_c_, c1_, c_mu_, chi_n_;
  VecX mean_;
  double sigma_;
  MatX C_, B_;
  VecX eigvals_, D_;  // D = sqrt(eigenvalues)
  VecX p_sigma_, p_c_;
  int generation_ = 0;
  long evaluations_ = 0;
  int eigen_interval_ = 1;
  int last_eigen_ = 0;
  int condition_clamps_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  VecX best_x_;
  std::optional<double> best_f_;
};

// Scale parameters live in log space: decode(x) = exp(clamp(x, ln lo, ln hi)).
struct BoundedEncoding {
  double lo = 1.0 / 3.0;
  double hi = 3.0;

  VecX decode(const VecX& x) const;
  VecX encode(const VecX& scale) const;  // ln, after clamping to [lo, hi]
  VecX clamp(const VecX& x) const;
};

struct MinimizeOptions {
  double sigma0 = 0.3;
  std::optional<int> lambda;
  std::uint64_t seed = 1;
  int max_generations = 150;
  long max_evaluations = 0;         // 0: unlimited
  double stall_tolerance = 1e-6;   // best-fitness gain below this ...
  int stall_generations = 20;      // ... over this many generations stops
  double target_fitness = -std::numeric_limits<double>::infinity();
  int threads = 1;
};

struct TraceRow {
  int generation;
  long evaluations;
  double best_fitness;  // best ever
  double mean_fitness;  // population mean of finite values
  double sigma;
};

struct MinimizeResult {
  VecX best_x;
  double best_fitness = 0.0;
  int generations = 0;
  long evaluations = 0;
  std::string stop_reason;
  std::vector<TraceRow> trace;
};

using Fitness = std::function<double(const VecX&)>;

// Runs ask/tell until a stop rule fires. Population members are evaluated
// on up to options.threads threads; results do not depend on the count.
MinimizeResult minimize(const Fitness& f, const VecX& mean0,
                        const MinimizeOptions& options);

// generation,evaluations,best_fitness,mean_fitness,sigma
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

// Evaluates f on every candidate with a small thread pool.
std::vector<double> evaluate_population(const Fitness& f,
                                        const std::vector<VecX>& candidates,
                                        int threads);

}  // namespace boxdeform
