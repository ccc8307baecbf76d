#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sls/core.hpp"

using namespace sls;

TEST_CASE("axpy basics") {
  const ParamVector w12({1.0, 2.0});
  CHECK(axpy(w12, 0.0, std::vector<double>{5.0, 5.0}).values() == std::vector<double>{1.0, 2.0});
  CHECK(axpy(w12, 1.0, std::vector<double>{-1.0, -2.0}).values() == std::vector<double>{0.0, 0.0});
  CHECK(axpy(ParamVector({0.5}), 2.5, std::vector<double>{0.2}).values() ==
        std::vector<double>{1.0});
  CHECK_THROWS_AS(axpy(w12, 1.0, std::vector<double>{1.0}), ContractError);
  // inputs unmodified
  CHECK(w12.values() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("axpy split-step property: eta1+eta2 within 4 ulps per coordinate") {
  SeededRng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> wv(5), dv(5);
    for (auto& x : wv) x = rng.normal();
    for (auto& x : dv) x = rng.normal();
    const double eta1 = rng.uniform() * 2.0 - 1.0;
    const double eta2 = rng.uniform() * 2.0 - 1.0;
    const ParamVector w(wv);
    const ParamVector once = axpy(w, eta1 + eta2, dv);
    const ParamVector twice = axpy(axpy(w, eta1, dv), eta2, dv);
    for (std::size_t i = 0; i < 5; ++i) {
      // ulps at the scale of the largest intermediate, since the sum
      // itself may cancel to zero.
      const double scale = std::max({std::abs(w[i]), std::abs(eta1 * dv[i]),
                                     std::abs(eta2 * dv[i]), std::abs(once[i]), 1.0e-300});
      CHECK(std::abs(once[i] - twice[i]) <=
            4.0 * scale * std::numeric_limits<double>::epsilon());
    }
  }
}

TEST_CASE("norm_sq") {
  CHECK(norm_sq(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(norm_sq(std::vector<double>{3.0, -4.0}) == 25.0);
  CHECK(norm_sq(std::vector<double>{1.0, 1.0, 1.0, 1.0}) == 4.0);
}

TEST_CASE("norm_sq permutation invariance") {
  SeededRng rng(3);
  std::vector<double> v(16);
  for (auto& x : v) x = rng.normal();
  const double base = norm_sq(v);
  for (int rep = 0; rep < 50; ++rep) {
    rng.shuffle(v);
    CHECK(norm_sq(v) == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("ParamVector rejects non-finite entries") {
  CHECK_THROWS_AS(ParamVector({1.0, std::nan("")}), ContractError);
  CHECK_THROWS_AS(ParamVector({std::numeric_limits<double>::infinity()}), ContractError);
}

TEST_CASE("sample_epoch chunking and determinism") {
  SUBCASE("single full batch") {
    SeededRng rng(1);
    const auto batches = sample_epoch(4, 4, rng);
    REQUIRE(batches.size() == 1);
    auto idx = batches[0].indices;
    std::sort(idx.begin(), idx.end());
    CHECK(idx == std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("chunk sizes 2,2,1") {
    SeededRng rng(1);
    const auto batches = sample_epoch(5, 2, rng);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].indices.size() == 2);
    CHECK(batches[1].indices.size() == 2);
    CHECK(batches[2].indices.size() == 1);
    CHECK(batches[0].id == 0);
    CHECK(batches[2].id == 2);
  }
  SUBCASE("same seed, same batches") {
    SeededRng a(7), b(7);
    const auto ba = sample_epoch(4, 2, a);
    const auto bb = sample_epoch(4, 2, b);
    REQUIRE(ba.size() == bb.size());
    for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i].indices == bb[i].indices);
  }
  SUBCASE("batch_size out of range") {
    SeededRng rng(1);
    CHECK_THROWS_AS(sample_epoch(4, 0, rng), ConfigError);
    CHECK_THROWS_AS(sample_epoch(4, 5, rng), ConfigError);
  }
}

TEST_CASE("epoch concatenation is a permutation for any seed") {
  for (std::uint64_t seed : {1ULL, 2ULL, 99ULL, 12345ULL}) {
    SeededRng rng(seed);
    const auto batches = sample_epoch(23, 5, rng);
    std::vector<std::size_t> all;
    for (const auto& b : batches) all.insert(all.end(), b.indices.begin(), b.indices.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> want(23);
    std::iota(want.begin(), want.end(), std::size_t{0});
    CHECK(all == want);
  }
}

TEST_CASE("partition_params") {
  SUBCASE("even contiguous split") {
    const auto p = partition_params(12, PartitionScheme::even(4));
    REQUIRE(p.group_count() == 4);
    CHECK(p.group(0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(p.group(3) == std::vector<std::size_t>{9, 10, 11});
  }
  SUBCASE("single component") {
    const auto p = partition_params(5, PartitionScheme::even(1));
    REQUIRE(p.group_count() == 1);
    CHECK(p.group(0) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  }
  SUBCASE("remainder goes to the leading groups") {
    const auto p = partition_params(7, PartitionScheme::even(4));
    REQUIRE(p.group_count() == 4);
    CHECK(p.group(0).size() == 2);
    CHECK(p.group(1).size() == 2);
    CHECK(p.group(2).size() == 2);
    CHECK(p.group(3).size() == 1);
  }
  SUBCASE("explicit sets validated") {
    CHECK_THROWS_AS(partition_params(3, PartitionScheme::from_sets({{0, 1}, {1, 2}})),
                    ConfigError);
    CHECK_THROWS_AS(partition_params(3, PartitionScheme::from_sets({{0, 1}})), ConfigError);
    CHECK_THROWS_AS(partition_params(3, PartitionScheme::from_sets({{0, 1, 2}, {}})),
                    ConfigError);
  }
  SUBCASE("cover and disjointness hold for random even splits") {
    SeededRng rng(5);
    for (int rep = 0; rep < 40; ++rep) {
      const std::size_t d = 1 + rng.uniform_index(40);
      const std::size_t k = 1 + rng.uniform_index(d);
      const auto p = partition_params(d, PartitionScheme::even(k));
      std::vector<char> seen(d, 0);
      for (const auto& g : p.groups()) {
        CHECK(!g.empty());
        for (std::size_t i : g) {
          CHECK(i < d);
          CHECK(!seen[i]);
          seen[i] = 1;
        }
      }
      CHECK(std::count(seen.begin(), seen.end(), 1) == static_cast<long>(d));
    }
  }
}

TEST_CASE("SeededRng reproducibility") {
  SeededRng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  SeededRng c(42), d(43);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs = differs || (c.next_u64() != d.next_u64());
  CHECK(differs);
}

TEST_CASE("SeededRng normal draws are finite and roughly centred") {
  SeededRng rng(9);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    REQUIRE(std::isfinite(z));
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.05));
}
