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

#include "boxdeform/cmaes.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <iostream>
#include <numeric>
#include <thread>

#include "boxdeform/error.hpp"

namespace boxdeform {

namespace {

constexpr double kMaxCondition = 1e14;

bool same(const MatX& a, const MatX& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

}  // namespace

int default_population(int n) {
  return 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
}

CmaEs::CmaEs(const VecX& mean0, double sigma0, std::uint64_t seed,
             std::optional<int> lambda)
    : n_(static_cast<int>(mean0.size())), rng_(seed) {
  if (n_ < 1) throw InvalidArgument("CMA-ES dimension must be >= 1");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw InvalidArgument("CMA-ES sigma0 must be positive");
  if (!mean0.allFinite()) throw InvalidArgument("CMA-ES mean0 must be finite");
  lambda_ = lambda.value_or(default_population(n_));
  if (lambda_ < 2) throw InvalidArgument("CMA-ES population must be >= 2");
  mu_ = lambda_ / 2;

  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i)
    weights_[i] = std::log(mu_ + 0.5) - std::log(static_cast<double>(i + 1));
  weights_ /= weights_.sum();
  mu_eff_ = 1.0 / weights_.squaredNorm();

  const double n = n_;
  c_sigma_ = (mu_eff_ + 2.0) / (n + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (n + 1.0)) - 1.0) +
             c_sigma_;
  c_c_ = (4.0 + mu_eff_ / n) / (n + 4.0 + 2.0 * mu_eff_ / n);
  c1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                  ((n + 2.0) * (n + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  eigen_interval_ = std::max(
      1, static_cast<int>(std::floor(1.0 / (10.0 * n * (c1_ + c_mu_)))));

  mean_ = mean0;
  sigma_ = sigma0;
  C_ = MatX::Identity(n_, n_);
  B_ = MatX::Identity(n_, n_);
  eigvals_ = VecX::Ones(n_);
  D_ = VecX::Ones(n_);
  p_sigma_ = VecX::Zero(n_);
  p_c_ = VecX::Zero(n_);
}

std::vector<VecX> CmaEs::ask() {
  std::vector<VecX> out;
  out.reserve(lambda_);
  VecX z(n_);
  for (int k = 0; k < lambda_; ++k) {
    for (int i = 0; i < n_; ++i) z[i] = normal_(rng_);
    out.push_back(mean_ + sigma_ * (B_ * D_.cwiseProduct(z)));
  }
  return out;
}

void CmaEs::tell(const std::vector<VecX>& candidates,
                 const std::vector<double>& fitness) {
  if (candidates.size() != static_cast<std::size_t>(lambda_) ||
      fitness.size() != candidates.size())
    throw InvalidArgument("tell expects " + std::to_string(lambda_) +
                          " candidates and fitnesses, got " +
                          std::to_string(candidates.size()) + " and " +
                          std::to_string(fitness.size()));
  for (const auto& x : candidates)
    if (x.size() != n_) throw InvalidArgument("candidate dimension mismatch");

  std::vector<int> order(lambda_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    bool fa = std::isfinite(fitness[a]), fb = std::isfinite(fitness[b]);
    if (fa != fb) return fa;
    return fa && fitness[a] < fitness[b];
  });

  evaluations_ += lambda_;
  if (std::isfinite(fitness[order[0]]) &&
      (!best_f_ || fitness[order[0]] < *best_f_)) {
    best_f_ = fitness[order[0]];
    best_x_ = candidates[order[0]];
  }

  const VecX old_mean = mean_;
  MatX y(n_, mu_);
  for (int i = 0; i < mu_; ++i) y.col(i) = (candidates[order[i]] - old_mean) / sigma_;
  const VecX y_w = y * weights_;
  mean_ = old_mean + sigma_ * y_w;

  const MatX inv_sqrt_c = B_ * D_.cwiseInverse().asDiagonal() * B_.transpose();
  p_sigma_ = (1.0 - c_sigma_) * p_sigma_ +
             std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_) * (inv_sqrt_c * y_w);

  ++generation_;
  const double ps_norm = p_sigma_.norm();
  const double h_sigma_lhs =
      ps_norm / std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
  const bool h_sigma = h_sigma_lhs < (1.4 + 2.0 / (n_ + 1.0)) * chi_n_;

  p_c_ = (1.0 - c_c_) * p_c_;
  if (h_sigma) p_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) * y_w;

  const double delta_h = h_sigma ? 0.0 : c_c_ * (2.0 - c_c_);
  MatX rank_mu = y * weights_.asDiagonal() * y.transpose();
  C_ = (1.0 - c1_ - c_mu_) * C_ +
       c1_ * (p_c_ * p_c_.transpose() + delta_h * C_) + c_mu_ * rank_mu;
  C_ = 0.5 * (C_ + C_.transpose()).eval();

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

  if (generation_ - last_eigen_ >= eigen_interval_) update_eigensystem();
}

void CmaEs::update_eigensystem() {
  last_eigen_ = generation_;
  Eigen::SelfAdjointEigenSolver<MatX> es(C_);
  if (es.info() != Eigen::Success)
    throw StageError("cmaes", "covariance eigendecomposition failed");
  VecX ev = es.eigenvalues();
  B_ = es.eigenvectors();
  const double top = ev.maxCoeff();
  const double floor_value = top / kMaxCondition;
  if (!(top > 0.0)) throw StageError("cmaes", "covariance collapsed");
  if (ev.minCoeff() < floor_value) {
    ++condition_clamps_;
    std::clog << "warning: CMA-ES covariance condition number exceeds 1e14 at "
                 "generation "
              << generation_ << "; clamping smallest eigenvalues\n";
    ev = ev.cwiseMax(floor_value);
    C_ = B_ * ev.asDiagonal() * B_.transpose();
  }
  eigvals_ = ev;
  D_ = ev.cwiseSqrt();
}

std::pair<VecX, double> CmaEs::best() const {
  if (!best_f_) throw StageError("cmaes", "no evaluations told yet");
  return {best_x_, *best_f_};
}

bool CmaEs::same_search_state(const CmaEs& o) const {
  return n_ == o.n_ && lambda_ == o.lambda_ && same(mean_, o.mean_) &&
         sigma_ == o.sigma_ && same(C_, o.C_) && same(B_, o.B_) &&
         same(D_, o.D_) && same(p_sigma_, o.p_sigma_) && same(p_c_, o.p_c_) &&
         generation_ == o.generation_ && evaluations_ == o.evaluations_ &&
         last_eigen_ == o.last_eigen_ && rng_ == o.rng_ &&
         same(best_x_, o.best_x_);
}

VecX BoundedEncoding::clamp(const VecX& x) const {
  return x.cwiseMax(std::log(lo)).cwiseMin(std::log(hi));
}

VecX BoundedEncoding::decode(const VecX& x) const {
  return clamp(x).array().exp();
}

VecX BoundedEncoding::encode(const VecX& scale) const {
  return scale.cwiseMax(lo).cwiseMin(hi).array().log();
}

std::vector<double> evaluate_population(const Fitness& f,
                                        const std::vector<VecX>& candidates,
                                        int threads) {
  const std::size_t n = candidates.size();
  std::vector<double> out(n);
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(candidates[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = f(candidates[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

MinimizeResult minimize(const Fitness& f, const VecX& mean0,
                        const MinimizeOptions& options) {
  if (options.max_generations < 1)
    throw InvalidArgument("max_generations must be >= 1");
  CmaEs es(mean0, options.sigma0, options.seed, options.lambda);
  MinimizeResult result;
  std::vector<double> best_history;
  for (int g = 0; g < options.max_generations; ++g) {
    auto pop = es.ask();
    auto fit = evaluate_population(f, pop, options.threads);
    es.tell(pop, fit);

    double sum = 0.0;
    int finite = 0;
    for (double v : fit)
      if (std::isfinite(v)) {
        sum += v;
        ++finite;
      }
    double best_f = es.has_best() ? es.best().second
                                  : std::numeric_limits<double>::infinity();
    result.trace.push_back({es.generation(), es.evaluations(), best_f,
                            finite ? sum / finite : std::nan(""), es.sigma()});
    best_history.push_back(best_f);

    if (best_f <= options.target_fitness) {
      result.stop_reason = "target";
      break;
    }
    if (options.max_evaluations > 0 &&
        es.evaluations() + es.lambda() > options.max_evaluations) {
      result.stop_reason = "max_evaluations";
      break;
    }
    const int k = options.stall_generations;
    if (k > 0 && static_cast<int>(best_history.size()) > k &&
        best_history[best_history.size() - 1 - k] - best_f < options.stall_tolerance) {
      result.stop_reason = "stall";
      break;
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "max_generations";
  if (!es.has_best()) throw StageError("cmaes", "every evaluation was non-finite");
  std::tie(result.best_x, result.best_fitness) = es.best();
  result.generations = es.generation();
  result.evaluations = es.evaluations();
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "generation,evaluations,best_fitness,mean_fitness,sigma\n";
  char buf[64];
  auto num = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  for (const auto& r : trace)
    out << r.generation << ',' << r.evaluations << ',' << num(r.best_fitness) << ','
        << num(r.mean_fitness) << ',' << num(r.sigma) << '\n';
}

}  // namespace boxdeform
