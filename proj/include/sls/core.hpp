#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sls {

// Contract violations (dimension mismatches, misuse of state) are logic
// errors; bad run configuration and numerical evaluation failures are
// runtime errors. EvalError carries the first offending value.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
  EvalError(const std::string& what, double offending)
      : std::runtime_error(what), offending_value(offending) {}
  double offending_value;
};

/// Flat parameter vector. Entries are validated to be finite at
/// construction; the dimension is fixed for the lifetime of the object.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values);

  static ParamVector zeros(std::size_t dim);

  std::size_t dim() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  bool operator==(const ParamVector& other) const = default;

 private:
  std::vector<double> values_;
};

/// Ordered list of disjoint index groups covering 0..d-1.
class GroupPartition {
 public:
  GroupPartition(std::size_t dim, std::vector<std::vector<std::size_t>> groups);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t group_count() const noexcept { return groups_.size(); }
  const std::vector<std::size_t>& group(std::size_t i) const { return groups_.at(i); }
  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::vector<std::size_t>> groups_;
};

struct PartitionScheme {
  enum class Kind { single, even, explicit_sets };
  Kind kind = Kind::single;
  std::size_t k = 1;
  std::vector<std::vector<std::size_t>> sets;

  static PartitionScheme single() { return {}; }
  static PartitionScheme even(std::size_t k) {
    PartitionScheme s;
    s.kind = Kind::even;
    s.k = k;
    return s;
  }
  static PartitionScheme from_sets(std::vector<std::vector<std::size_t>> sets) {
    PartitionScheme s;
    s.kind = Kind::explicit_sets;
    s.sets = std::move(sets);
    return s;
  }
};

GroupPartition partition_params(std::size_t dim, const PartitionScheme& scheme);

/// Mini-batch: sample indices plus a monotone id so trace rows are
/// joinable to batch contents.
struct Batch {
  std::vector<std::size_t> indices;
  std::int64_t id = 0;
};

/// Deterministic generator. The algorithm is fixed and versioned
/// (recorded in trace headers) so sequences reproduce across platforms:
/// mt19937_64 engine, Fisher-Yates shuffles with rejection-sampled
/// bounded draws, Box-Muller normals. The standard distributions are
/// implementation-defined and deliberately not used.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  static constexpr const char* kAlgorithmId = "mt19937_64-fy-bm/v1";

  std::uint64_t next_u64() { return engine_(); }

  /// Unbiased draw from [0, bound) via rejection sampling. bound >= 1.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via basic Box-Muller (two uniforms per draw, no
  /// cached spare, so the consumed stream is position-independent).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Evaluation contract shared by every benchmark problem. loss and
/// gradient must be pure: identical (w, batch) inputs give bitwise
/// identical outputs. Implementations are immutable after construction
/// and safe for concurrent read-only evaluation.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual std::size_t sample_count() const = 0;
  virtual double loss(const ParamVector& w, const Batch& batch) const = 0;
  virtual std::vector<double> gradient(const ParamVector& w, const Batch& batch) const = 0;
  virtual ParamVector initial_point() const = 0;

  /// Classification metric on a batch, when the problem defines one.
  /// Returns a quiet NaN otherwise.
  virtual double accuracy(const ParamVector& /*w*/, const Batch& /*batch*/) const;

  /// Batch covering every sample, id -1.
  Batch full_batch() const;
};

/// w + eta * d elementwise. Inputs are not modified.
ParamVector axpy(const ParamVector& w, double eta, std::span<const double> d);

/// Sum of squared entries.
double norm_sq(std::span<const double> g);

/// One epoch of mini-batches: a seeded shuffle of 0..n-1 chunked into
/// batches of batch_size (last one may be smaller). Batch ids run from
/// first_id upward.
std::vector<Batch> sample_epoch(std::size_t n_samples, std::size_t batch_size,
                                SeededRng& rng, std::int64_t first_id = 0);

}  // namespace sls
