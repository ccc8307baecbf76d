#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sls/core.hpp"

namespace sls {

/// Fully determines an Objective: same spec, same losses and gradients.
struct ProblemSpec {
  std::string name = "quadratic";
  std::size_t dim = 50;
  std::size_t n_samples = 0;  // 0: use the problem's default
  std::uint64_t seed = 1;
  double condition = 100.0;   // quadratic
  double reg = 0.0;           // logistic L2 strength
  double margin = 2.0;        // logistic / mlp class separation
  std::size_t rank = 2;       // matmf
  std::size_t rows = 6;       // matmf
  std::size_t cols = 5;       // matmf
  std::size_t hidden = 8;     // mlp hidden width
};

/// f(w) = 1/2 w'Aw - b'w with A = Q' diag(eigs) Q, eigenvalues log-spaced
/// over [1, condition], Q a seeded random orthogonal matrix. The batch
/// argument is ignored (every sample is the same function), which makes
/// batch consistency trivial.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(std::vector<std::vector<double>> a, std::vector<double> b,
                     std::size_t n_samples, std::uint64_t seed);

  std::size_t dim() const override { return b_.size(); }
  std::size_t sample_count() const override { return n_samples_; }
  double loss(const ParamVector& w, const Batch& batch) const override;
  std::vector<double> gradient(const ParamVector& w, const Batch& batch) const override;
  ParamVector initial_point() const override;

  const std::vector<std::vector<double>>& matrix() const { return a_; }
  const std::vector<double>& rhs() const { return b_; }

  /// A^-1 b via Cholesky; independent of the gradient path.
  ParamVector minimizer() const;
  double min_value() const;

 private:
  std::vector<std::vector<double>> a_;
  std::vector<double> b_;
  std::size_t n_samples_;
  std::uint64_t seed_;
};

/// f(x, y) = (1-x)^2 + 100 (y - x^2)^2, single sample, start (-1.2, 1).
class RosenbrockObjective final : public Objective {
 public:
  std::size_t dim() const override { return 2; }
  std::size_t sample_count() const override { return 1; }
  double loss(const ParamVector& w, const Batch& batch) const override;
  std::vector<double> gradient(const ParamVector& w, const Batch& batch) const override;
  ParamVector initial_point() const override;
};

/// Binary cross-entropy over seeded Gaussian class clusters with optional
/// L2. Per-batch mean loss; accuracy defined as sign agreement.
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(std::size_t dim, std::size_t n_samples, std::uint64_t seed,
                    double margin, double reg);

  std::size_t dim() const override { return dim_; }
  std::size_t sample_count() const override { return labels_.size(); }
  double loss(const ParamVector& w, const Batch& batch) const override;
  std::vector<double> gradient(const ParamVector& w, const Batch& batch) const override;
  ParamVector initial_point() const override;
  double accuracy(const ParamVector& w, const Batch& batch) const override;

 private:
  double margin_score(const ParamVector& w, std::size_t sample) const;

  std::size_t dim_;
  std::vector<std::vector<double>> x_;
  std::vector<int> labels_;
  double reg_;
};

/// || M - U V' ||^2 style factorization: per-entry squared error, the
/// dataset samples are the matrix entries. M is planted as U0 V0', so a
/// zero-loss embedding exists.
class MatFacObjective final : public Objective {
 public:
  MatFacObjective(std::size_t rows, std::size_t cols, std::size_t rank, std::uint64_t seed);

  std::size_t dim() const override { return (rows_ + cols_) * rank_; }
  std::size_t sample_count() const override { return rows_ * cols_; }
  double loss(const ParamVector& w, const Batch& batch) const override;
  std::vector<double> gradient(const ParamVector& w, const Batch& batch) const override;
  ParamVector initial_point() const override;

  /// The stacked (U0, V0) that reproduces M exactly.
  ParamVector planted_point() const;

 private:
  std::size_t rows_, cols_, rank_;
  std::vector<double> m_;        // rows x cols, row-major
  std::vector<double> planted_;  // stacked U0 then V0, row-major
  std::uint64_t seed_;
};

/// One-hidden-layer tanh network with softmax cross-entropy on seeded
/// 2-d two-class blobs. Hand-written backprop. Initial point has zero
/// input weights and seeded output weights, so the initial loss is
/// exactly ln 2 while the seed breaks symmetry.
class MlpObjective final : public Objective {
 public:
  MlpObjective(std::size_t hidden, std::size_t n_samples, std::uint64_t seed, double margin);

  std::size_t dim() const override { return 5 * hidden_ + 2; }
  std::size_t sample_count() const override { return labels_.size(); }
  double loss(const ParamVector& w, const Batch& batch) const override;
  std::vector<double> gradient(const ParamVector& w, const Batch& batch) const override;
  ParamVector initial_point() const override;
  double accuracy(const ParamVector& w, const Batch& batch) const override;

  std::size_t hidden() const { return hidden_; }

 private:
  // Parameter layout: W1 (hidden x 2, row-major), b1 (hidden),
  // W2 (2 x hidden, row-major), b2 (2).
  void forward(const ParamVector& w, std::size_t sample, std::vector<double>& activ,
               double logits[2]) const;

  std::size_t hidden_;
  std::vector<std::array<double, 2>> x_;
  std::vector<int> labels_;
  std::uint64_t seed_;
};

/// Factory from a ProblemSpec; throws ConfigError on unknown names.
std::shared_ptr<const Objective> make_objective(const ProblemSpec& spec);

std::shared_ptr<const QuadraticObjective> quadratic_objective(const ProblemSpec& spec);
std::shared_ptr<const RosenbrockObjective> rosenbrock_objective();
std::shared_ptr<const LogisticObjective> logistic_objective(const ProblemSpec& spec);
std::shared_ptr<const MatFacObjective> matmf_objective(const ProblemSpec& spec);
std::shared_ptr<const MlpObjective> mlp_objective(const ProblemSpec& spec);

/// Central differences (f(w + h e_i) - f(w - h e_i)) / 2h per coordinate.
/// Independent oracle for every analytic gradient.
std::vector<double> finite_diff_gradient(const Objective& obj, const ParamVector& w,
                                         const Batch& batch, double h);

}  // namespace sls
