#include "sls/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sls {

ParamVector::ParamVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw ContractError("ParamVector: non-finite entry at construction");
    }
  }
}

ParamVector ParamVector::zeros(std::size_t dim) {
  return ParamVector(std::vector<double>(dim, 0.0));
}

GroupPartition::GroupPartition(std::size_t dim, std::vector<std::vector<std::size_t>> groups)
    : dim_(dim), groups_(std::move(groups)) {
  std::vector<char> seen(dim, 0);
  std::size_t covered = 0;
  for (const auto& g : groups_) {
    if (g.empty()) throw ConfigError("GroupPartition: empty group");
    for (std::size_t idx : g) {
      if (idx >= dim) throw ConfigError("GroupPartition: index out of range");
      if (seen[idx]) throw ConfigError("GroupPartition: overlapping groups");
      seen[idx] = 1;
      ++covered;
    }
  }
  if (covered != dim) throw ConfigError("GroupPartition: groups do not cover 0..d-1");
}

GroupPartition partition_params(std::size_t dim, const PartitionScheme& scheme) {
  if (dim < 1) throw ConfigError("partition_params: dimension must be >= 1");
  switch (scheme.kind) {
    case PartitionScheme::Kind::single: {
      std::vector<std::size_t> all(dim);
      std::iota(all.begin(), all.end(), std::size_t{0});
      return GroupPartition(dim, {std::move(all)});
    }
    case PartitionScheme::Kind::even: {
      if (scheme.k < 1 || scheme.k > dim) {
        throw ConfigError("partition_params: even split needs 1 <= k <= d");
      }
      // k contiguous groups, sizes differing by at most one; the first
      // d % k groups take the extra element.
      std::vector<std::vector<std::size_t>> groups(scheme.k);
      const std::size_t base = dim / scheme.k;
      const std::size_t rem = dim % scheme.k;
      std::size_t next = 0;
      for (std::size_t gi = 0; gi < scheme.k; ++gi) {
        const std::size_t size = base + (gi < rem ? 1 : 0);
        groups[gi].resize(size);
        std::iota(groups[gi].begin(), groups[gi].end(), next);
        next += size;
      }
      return GroupPartition(dim, std::move(groups));
    }
    case PartitionScheme::Kind::explicit_sets:
      return GroupPartition(dim, scheme.sets);
  }
  throw ConfigError("partition_params: unknown scheme");
}

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw ContractError("uniform_index: bound must be >= 1");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double SeededRng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  return r * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
}

double Objective::accuracy(const ParamVector&, const Batch&) const {
  return std::numeric_limits<double>::quiet_NaN();
}

Batch Objective::full_batch() const {
  Batch b;
  b.indices.resize(sample_count());
  std::iota(b.indices.begin(), b.indices.end(), std::size_t{0});
  b.id = -1;
  return b;
}

ParamVector axpy(const ParamVector& w, double eta, std::span<const double> d) {
  if (w.dim() != d.size()) throw ContractError("axpy: dimension mismatch");
  if (!std::isfinite(eta)) throw ContractError("axpy: eta must be finite");
  std::vector<double> out(w.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] + eta * d[i];
  return ParamVector(std::move(out));
}

double norm_sq(std::span<const double> g) {
  double sum = 0.0;
  for (double x : g) sum += x * x;
  return sum;
}

std::vector<Batch> sample_epoch(std::size_t n_samples, std::size_t batch_size,
                                SeededRng& rng, std::int64_t first_id) {
  if (batch_size < 1 || batch_size > n_samples) {
    throw ConfigError("sample_epoch: need 1 <= batch_size <= n_samples");
  }
  std::vector<std::size_t> order(n_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  std::vector<Batch> batches;
  batches.reserve((n_samples + batch_size - 1) / batch_size);
  for (std::size_t start = 0; start < n_samples; start += batch_size) {
    Batch b;
    const std::size_t end = std::min(start + batch_size, n_samples);
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
    b.id = first_id++;
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace sls
