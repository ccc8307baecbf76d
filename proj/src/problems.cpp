#include "sls/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sls {

namespace {

std::vector<double> gaussian_vector(SeededRng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Random orthogonal matrix from modified Gram-Schmidt on a seeded
// Gaussian matrix. Rows form the orthonormal basis.
std::vector<std::vector<double>> random_orthogonal(SeededRng& rng, std::size_t d) {
  std::vector<std::vector<double>> q(d);
  for (std::size_t i = 0; i < d; ++i) {
    q[i] = gaussian_vector(rng, d);
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += q[i][k] * q[j][k];
      for (std::size_t k = 0; k < d; ++k) q[i][k] -= dot * q[j][k];
    }
    const double nrm = std::sqrt(norm_sq(q[i]));
    if (nrm < 1e-12) {
      // Degenerate draw; retry this row.
      --i;
      continue;
    }
    for (double& x : q[i]) x /= nrm;
  }
  return q;
}

void check_batch(const Batch& batch, std::size_t n) {
  if (batch.indices.empty()) throw ContractError("objective: empty batch");
  for (std::size_t idx : batch.indices) {
    if (idx >= n) throw ContractError("objective: batch index out of range");
  }
}

double stable_softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic

QuadraticObjective::QuadraticObjective(std::vector<std::vector<double>> a,
                                       std::vector<double> b, std::size_t n_samples,
                                       std::uint64_t seed)
    : a_(std::move(a)), b_(std::move(b)), n_samples_(n_samples), seed_(seed) {
  if (a_.size() != b_.size()) throw ConfigError("QuadraticObjective: A and b sizes differ");
  for (const auto& row : a_) {
    if (row.size() != b_.size()) throw ConfigError("QuadraticObjective: A not square");
  }
  if (n_samples_ < 1) n_samples_ = 1;
}

double QuadraticObjective::loss(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, n_samples_);
  if (w.dim() != dim()) throw ContractError("quadratic loss: dimension mismatch");
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    double aw = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) aw += a_[i][j] * w[j];
    quad += w[i] * aw;
    lin += b_[i] * w[i];
  }
  return 0.5 * quad - lin;
}

std::vector<double> QuadraticObjective::gradient(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, n_samples_);
  if (w.dim() != dim()) throw ContractError("quadratic gradient: dimension mismatch");
  std::vector<double> g(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    double aw = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) aw += a_[i][j] * w[j];
    g[i] = aw - b_[i];
  }
  return g;
}

ParamVector QuadraticObjective::initial_point() const {
  SeededRng rng(seed_ ^ 0x5157ULL);
  return ParamVector(gaussian_vector(rng, dim()));
}

ParamVector QuadraticObjective::minimizer() const {
  // Cholesky A = L L', then two triangular solves.
  const std::size_t d = dim();
  std::vector<std::vector<double>> l(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a_[i][j];
      for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (sum <= 0.0) throw EvalError("quadratic minimizer: matrix not SPD", sum);
        l[i][j] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  std::vector<double> y(d);
  for (std::size_t i = 0; i < d; ++i) {
    double sum = b_[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
    y[i] = sum / l[i][i];
  }
  std::vector<double> w(d);
  for (std::size_t ii = d; ii-- > 0;) {
    double sum = y[ii];
    for (std::size_t k = ii + 1; k < d; ++k) sum -= l[k][ii] * w[k];
    w[ii] = sum / l[ii][ii];
  }
  return ParamVector(std::move(w));
}

double QuadraticObjective::min_value() const {
  const ParamVector w_star = minimizer();
  return loss(w_star, full_batch());
}

std::shared_ptr<const QuadraticObjective> quadratic_objective(const ProblemSpec& spec) {
  if (spec.condition < 1.0) throw ConfigError("quadratic: condition number must be >= 1");
  const std::size_t d = spec.dim;
  if (d < 1) throw ConfigError("quadratic: dimension must be >= 1");
  SeededRng rng(spec.seed);

  std::vector<std::vector<double>> a(d, std::vector<double>(d, 0.0));
  if (spec.condition == 1.0 || d == 1) {
    for (std::size_t i = 0; i < d; ++i) a[i][i] = 1.0;
  } else {
    // Log-spaced spectrum over [1, condition], rotated by a seeded
    // orthogonal basis: A = Q' diag(eigs) Q.
    std::vector<double> eigs(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(d - 1);
      eigs[i] = std::pow(spec.condition, frac);
    }
    const auto q = random_orthogonal(rng, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < d; ++k) sum += q[k][i] * eigs[k] * q[k][j];
        a[i][j] = sum;
      }
    }
    // Symmetrize to kill rounding drift from the triple product.
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double s = 0.5 * (a[i][j] + a[j][i]);
        a[i][j] = s;
        a[j][i] = s;
      }
    }
  }
  std::vector<double> b = gaussian_vector(rng, d);
  const std::size_t n = spec.n_samples > 0 ? spec.n_samples : 1;
  return std::make_shared<QuadraticObjective>(std::move(a), std::move(b), n, spec.seed);
}

// ---------------------------------------------------------------------------
// Rosenbrock

double RosenbrockObjective::loss(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, 1);
  if (w.dim() != 2) throw ContractError("rosenbrock: dimension must be 2");
  const double x = w[0];
  const double y = w[1];
  const double t = y - x * x;
  return (1.0 - x) * (1.0 - x) + 100.0 * t * t;
}

std::vector<double> RosenbrockObjective::gradient(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, 1);
  const double x = w[0];
  const double y = w[1];
  const double t = y - x * x;
  return {-2.0 * (1.0 - x) - 400.0 * x * t, 200.0 * t};
}

ParamVector RosenbrockObjective::initial_point() const {
  return ParamVector({-1.2, 1.0});
}

std::shared_ptr<const RosenbrockObjective> rosenbrock_objective() {
  return std::make_shared<RosenbrockObjective>();
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticObjective::LogisticObjective(std::size_t dim, std::size_t n_samples,
                                     std::uint64_t seed, double margin, double reg)
    : dim_(dim), reg_(reg) {
  if (dim_ < 1) throw ConfigError("logistic: dimension must be >= 1");
  if (n_samples < 2) throw ConfigError("logistic: need at least 2 samples");
  if (reg_ < 0.0) throw ConfigError("logistic: regularization must be >= 0");
  SeededRng rng(seed);
  std::vector<double> direction = gaussian_vector(rng, dim_);
  const double nrm = std::sqrt(norm_sq(direction));
  for (double& x : direction) x /= nrm;

  x_.resize(n_samples);
  labels_.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const int y = rng.uniform() < 0.5 ? 0 : 1;
    const double shift = (y == 1 ? 0.5 : -0.5) * margin;
    x_[i] = gaussian_vector(rng, dim_);
    for (std::size_t j = 0; j < dim_; ++j) x_[i][j] += shift * direction[j];
    labels_[i] = y;
  }
}

double LogisticObjective::margin_score(const ParamVector& w, std::size_t i) const {
  double z = 0.0;
  for (std::size_t j = 0; j < dim_; ++j) z += x_[i][j] * w[j];
  return z;
}

double LogisticObjective::loss(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  if (w.dim() != dim_) throw ContractError("logistic loss: dimension mismatch");
  double sum = 0.0;
  for (std::size_t idx : batch.indices) {
    const double z = margin_score(w, idx);
    sum += stable_softplus(z) - static_cast<double>(labels_[idx]) * z;
  }
  return sum / static_cast<double>(batch.indices.size()) + 0.5 * reg_ * norm_sq(w.span());
}

std::vector<double> LogisticObjective::gradient(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  if (w.dim() != dim_) throw ContractError("logistic gradient: dimension mismatch");
  std::vector<double> g(dim_, 0.0);
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t idx : batch.indices) {
    const double resid = sigmoid(margin_score(w, idx)) - static_cast<double>(labels_[idx]);
    for (std::size_t j = 0; j < dim_; ++j) g[j] += resid * x_[idx][j] * inv;
  }
  for (std::size_t j = 0; j < dim_; ++j) g[j] += reg_ * w[j];
  return g;
}

ParamVector LogisticObjective::initial_point() const {
  return ParamVector::zeros(dim_);
}

double LogisticObjective::accuracy(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  std::size_t hits = 0;
  for (std::size_t idx : batch.indices) {
    const int pred = margin_score(w, idx) > 0.0 ? 1 : 0;
    if (pred == labels_[idx]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.indices.size());
}

std::shared_ptr<const LogisticObjective> logistic_objective(const ProblemSpec& spec) {
  const std::size_t n = spec.n_samples > 0 ? spec.n_samples : 1000;
  return std::make_shared<LogisticObjective>(spec.dim, n, spec.seed, spec.margin, spec.reg);
}

// ---------------------------------------------------------------------------
// Matrix factorization

MatFacObjective::MatFacObjective(std::size_t rows, std::size_t cols, std::size_t rank,
                                 std::uint64_t seed)
    : rows_(rows), cols_(cols), rank_(rank), seed_(seed) {
  if (rank_ < 1 || rank_ > std::min(rows_, cols_)) {
    throw ConfigError("matmf: need 1 <= rank <= min(rows, cols)");
  }
  SeededRng rng(seed);
  planted_ = gaussian_vector(rng, dim());
  m_.assign(rows_ * cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < rank_; ++k) {
        sum += planted_[i * rank_ + k] * planted_[(rows_ + j) * rank_ + k];
      }
      m_[i * cols_ + j] = sum;
    }
  }
}

double MatFacObjective::loss(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, sample_count());
  if (w.dim() != dim()) throw ContractError("matmf loss: dimension mismatch");
  double sum = 0.0;
  for (std::size_t s : batch.indices) {
    const std::size_t i = s / cols_;
    const std::size_t j = s % cols_;
    double pred = 0.0;
    for (std::size_t k = 0; k < rank_; ++k) {
      pred += w[i * rank_ + k] * w[(rows_ + j) * rank_ + k];
    }
    const double e = m_[s] - pred;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.indices.size());
}

std::vector<double> MatFacObjective::gradient(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, sample_count());
  if (w.dim() != dim()) throw ContractError("matmf gradient: dimension mismatch");
  std::vector<double> g(dim(), 0.0);
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t s : batch.indices) {
    const std::size_t i = s / cols_;
    const std::size_t j = s % cols_;
    double pred = 0.0;
    for (std::size_t k = 0; k < rank_; ++k) {
      pred += w[i * rank_ + k] * w[(rows_ + j) * rank_ + k];
    }
    const double e = m_[s] - pred;
    for (std::size_t k = 0; k < rank_; ++k) {
      g[i * rank_ + k] += -2.0 * e * w[(rows_ + j) * rank_ + k] * inv;
      g[(rows_ + j) * rank_ + k] += -2.0 * e * w[i * rank_ + k] * inv;
    }
  }
  return g;
}

ParamVector MatFacObjective::initial_point() const {
  SeededRng rng(seed_ ^ 0x4D46ULL);
  std::vector<double> w = gaussian_vector(rng, dim());
  for (double& x : w) x *= 0.3;
  return ParamVector(std::move(w));
}

ParamVector MatFacObjective::planted_point() const {
  return ParamVector(planted_);
}

std::shared_ptr<const MatFacObjective> matmf_objective(const ProblemSpec& spec) {
  return std::make_shared<MatFacObjective>(spec.rows, spec.cols, spec.rank, spec.seed);
}

// ---------------------------------------------------------------------------
// One-hidden-layer MLP

MlpObjective::MlpObjective(std::size_t hidden, std::size_t n_samples, std::uint64_t seed,
                           double margin)
    : hidden_(hidden), seed_(seed) {
  if (hidden_ < 1) throw ConfigError("mlp: hidden width must be >= 1");
  if (n_samples < 2) throw ConfigError("mlp: need at least 2 samples");
  SeededRng rng(seed);
  double direction[2] = {rng.normal(), rng.normal()};
  const double nrm = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1]);
  direction[0] /= nrm;
  direction[1] /= nrm;

  x_.resize(n_samples);
  labels_.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const int y = rng.uniform() < 0.5 ? 0 : 1;
    const double shift = (y == 1 ? 0.5 : -0.5) * margin;
    x_[i] = {rng.normal() + shift * direction[0], rng.normal() + shift * direction[1]};
    labels_[i] = y;
  }
}

void MlpObjective::forward(const ParamVector& w, std::size_t sample,
                           std::vector<double>& activ, double logits[2]) const {
  const std::size_t h = hidden_;
  const double* w1 = w.values().data();            // h x 2
  const double* b1 = w1 + 2 * h;                   // h
  const double* w2 = b1 + h;                       // 2 x h
  const double* b2 = w2 + 2 * h;                   // 2
  activ.resize(h);
  for (std::size_t u = 0; u < h; ++u) {
    activ[u] = std::tanh(w1[2 * u] * x_[sample][0] + w1[2 * u + 1] * x_[sample][1] + b1[u]);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    double z = b2[c];
    for (std::size_t u = 0; u < h; ++u) z += w2[c * h + u] * activ[u];
    logits[c] = z;
  }
}

double MlpObjective::loss(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  if (w.dim() != dim()) throw ContractError("mlp loss: dimension mismatch");
  std::vector<double> activ;
  double sum = 0.0;
  for (std::size_t idx : batch.indices) {
    double logits[2];
    forward(w, idx, activ, logits);
    const double zmax = std::max(logits[0], logits[1]);
    const double lse = zmax + std::log(std::exp(logits[0] - zmax) + std::exp(logits[1] - zmax));
    sum += lse - logits[labels_[idx]];
  }
  return sum / static_cast<double>(batch.indices.size());
}

std::vector<double> MlpObjective::gradient(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  if (w.dim() != dim()) throw ContractError("mlp gradient: dimension mismatch");
  const std::size_t h = hidden_;
  const double* w1 = w.values().data();
  const double* w2 = w1 + 2 * h + h;
  std::vector<double> g(dim(), 0.0);
  double* g_w1 = g.data();
  double* g_b1 = g_w1 + 2 * h;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + 2 * h;

  std::vector<double> activ;
  const double inv = 1.0 / static_cast<double>(batch.indices.size());
  for (std::size_t idx : batch.indices) {
    double logits[2];
    forward(w, idx, activ, logits);
    const double zmax = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - zmax);
    const double e1 = std::exp(logits[1] - zmax);
    const double denom = e0 + e1;
    double dlogits[2] = {e0 / denom, e1 / denom};
    dlogits[labels_[idx]] -= 1.0;

    for (std::size_t c = 0; c < 2; ++c) {
      g_b2[c] += dlogits[c] * inv;
      for (std::size_t u = 0; u < h; ++u) g_w2[c * h + u] += dlogits[c] * activ[u] * inv;
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double da = w2[0 * h + u] * dlogits[0] + w2[1 * h + u] * dlogits[1];
      const double dz = da * (1.0 - activ[u] * activ[u]);
      g_w1[2 * u] += dz * x_[idx][0] * inv;
      g_w1[2 * u + 1] += dz * x_[idx][1] * inv;
      g_b1[u] += dz * inv;
    }
  }
  return g;
}

ParamVector MlpObjective::initial_point() const {
  // Zero input weights keep the initial activations at tanh(0) = 0, so
  // the logits are exactly b2 = 0 and the loss starts at ln 2. Seeded
  // output weights break the hidden-unit symmetry.
  std::vector<double> w(dim(), 0.0);
  SeededRng rng(seed_ ^ 0x4D4CULL);
  const std::size_t h = hidden_;
  for (std::size_t i = 0; i < 2 * h; ++i) w[2 * h + h + i] = 0.5 * rng.normal();
  return ParamVector(std::move(w));
}

double MlpObjective::accuracy(const ParamVector& w, const Batch& batch) const {
  check_batch(batch, labels_.size());
  std::vector<double> activ;
  std::size_t hits = 0;
  for (std::size_t idx : batch.indices) {
    double logits[2];
    forward(w, idx, activ, logits);
    const int pred = logits[1] > logits[0] ? 1 : 0;
    if (pred == labels_[idx]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.indices.size());
}

std::shared_ptr<const MlpObjective> mlp_objective(const ProblemSpec& spec) {
  const std::size_t n = spec.n_samples > 0 ? spec.n_samples : 400;
  return std::make_shared<MlpObjective>(spec.hidden, n, spec.seed, spec.margin);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Objective> make_objective(const ProblemSpec& spec) {
  if (spec.name == "quadratic") return quadratic_objective(spec);
  if (spec.name == "rosenbrock") return rosenbrock_objective();
  if (spec.name == "logistic") return logistic_objective(spec);
  if (spec.name == "matmf") return matmf_objective(spec);
  if (spec.name == "mlp") return mlp_objective(spec);
  throw ConfigError("unknown problem name: " + spec.name);
}

std::vector<double> finite_diff_gradient(const Objective& obj, const ParamVector& w,
                                         const Batch& batch, double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_gradient: h must be > 0");
  std::vector<double> g(w.dim());
  std::vector<double> values = w.values();
  for (std::size_t i = 0; i < w.dim(); ++i) {
    const double orig = values[i];
    values[i] = orig + h;
    const double fp = obj.loss(ParamVector(values), batch);
    values[i] = orig - h;
    const double fm = obj.loss(ParamVector(values), batch);
    values[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace sls
