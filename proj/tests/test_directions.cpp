#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sls/directions.hpp"

using namespace sls;

namespace {
const AdamConfig kDefaults{};
}

TEST_CASE("sgd_direction negates") {
  CHECK(sgd_direction(std::vector<double>{0.0, 0.0}) == std::vector<double>{-0.0, -0.0});
  CHECK(sgd_direction(std::vector<double>{1.0, -2.0}) == std::vector<double>{-1.0, 2.0});
  CHECK(norm_sq(sgd_direction(std::vector<double>{3.0, 4.0})) == 25.0);
}

TEST_CASE("adam_update_state moment arithmetic") {
  SUBCASE("EMA from zero state") {
    const AdamState s0 = AdamState::zeros(1);
    const AdamState s1 = adam_update_state(s0, std::vector<double>{1.0}, kDefaults);
    CHECK(s1.m[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s1.v[0] == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(s1.t == 1);
    // input untouched
    CHECK(s0.m[0] == 0.0);
    CHECK(s0.t == 0);
  }
  SUBCASE("no-memory limit beta1 = beta2 = 0") {
    AdamConfig cfg;
    cfg.beta1 = 0.0;
    cfg.beta2 = 0.0;
    AdamState s{std::vector<double>{7.0}, std::vector<double>{9.0}, 3};
    const AdamState s2 = adam_update_state(s, std::vector<double>{2.0}, cfg);
    CHECK(s2.m[0] == 2.0);
    CHECK(s2.v[0] == 4.0);
    CHECK(s2.t == 4);
  }
  SUBCASE("decay only on zero gradient") {
    AdamState s{std::vector<double>{1.0}, std::vector<double>{1.0}, 1};
    const AdamState s2 = adam_update_state(s, std::vector<double>{0.0}, kDefaults);
    CHECK(s2.m[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(s2.v[0] == doctest::Approx(0.999).epsilon(1e-15));
  }
}

TEST_CASE("adam_direction at the first step") {
  SUBCASE("bias correction recovers the gradient: d ~ (-1, 1)") {
    const AdamState s1 =
        adam_update_state(AdamState::zeros(2), std::vector<double>{3.0, -4.0}, kDefaults);
    const auto d = adam_direction(s1, kDefaults);
    CHECK(d[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(d[1] == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("zero gradient maps to zero direction") {
    const AdamState s1 =
        adam_update_state(AdamState::zeros(2), std::vector<double>{0.0, 0.0}, kDefaults);
    const auto d = adam_direction(s1, kDefaults);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
  }
  SUBCASE("beta1 = 0 closed form") {
    AdamConfig cfg;
    cfg.beta1 = 0.0;
    const AdamState s1 = adam_update_state(AdamState::zeros(1), std::vector<double>{2.0}, cfg);
    const auto d = adam_direction(s1, cfg);
    CHECK(d[0] == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("t = 0 is state misuse") {
    CHECK_THROWS_AS(adam_direction(AdamState::zeros(2), kDefaults), ContractError);
    CHECK_THROWS_AS(preconditioner(AdamState::zeros(2), kDefaults), ContractError);
  }
}

TEST_CASE("preconditioner floor and first-step value") {
  SUBCASE("zero gradient floors at eps") {
    const AdamState s1 =
        adam_update_state(AdamState::zeros(3), std::vector<double>{0.0, 0.0, 0.0}, kDefaults);
    for (double p : preconditioner(s1, kDefaults)) CHECK(p == kDefaults.eps);
  }
  SUBCASE("t=1: sqrt(v_hat) = |g|") {
    const AdamState s1 =
        adam_update_state(AdamState::zeros(1), std::vector<double>{3.0}, kDefaults);
    const auto p = preconditioner(s1, kDefaults);
    CHECK(p[0] == doctest::Approx(3.0 + 1e-8).epsilon(1e-9));
  }
  SUBCASE("entries strictly positive for random inputs") {
    SeededRng rng(4);
    AdamState s = AdamState::zeros(6);
    for (int step = 0; step < 20; ++step) {
      std::vector<double> g(6);
      for (auto& x : g) x = rng.normal();
      s = adam_update_state(s, g, kDefaults);
      for (double p : preconditioner(s, kDefaults)) CHECK(p >= kDefaults.eps);
    }
  }
}

TEST_CASE("probe direction is antiparallel to g coordinatewise") {
  SeededRng rng(8);
  AdamState s = AdamState::zeros(5);
  for (int step = 0; step < 30; ++step) {
    std::vector<double> g(5);
    for (auto& x : g) x = rng.normal();
    s = adam_update_state(s, g, kDefaults);
    const auto d = adam_probe_direction(s, g, kDefaults);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] != 0.0) CHECK(std::signbit(d[i]) != std::signbit(g[i]));
    }
  }
}

TEST_CASE("beta1 = 0 adam_direction is antiparallel to g and equals the probe") {
  AdamConfig cfg;
  cfg.beta1 = 0.0;
  SeededRng rng(12);
  AdamState s = AdamState::zeros(4);
  for (int step = 0; step < 20; ++step) {
    std::vector<double> g(4);
    for (auto& x : g) x = rng.normal();
    s = adam_update_state(s, g, cfg);
    const auto d = adam_direction(s, cfg);
    const auto probe = adam_probe_direction(s, g, cfg);
    CHECK(d == probe);
    for (std::size_t i = 0; i < 4; ++i) {
      if (g[i] != 0.0) CHECK(std::signbit(d[i]) != std::signbit(g[i]));
    }
  }
}

TEST_CASE("direction magnitude bounded by |m_hat| / eps") {
  SeededRng rng(15);
  AdamState s = AdamState::zeros(4);
  for (int step = 1; step <= 25; ++step) {
    std::vector<double> g(4);
    for (auto& x : g) x = rng.normal() * 10.0;
    s = adam_update_state(s, g, kDefaults);
    const auto d = adam_direction(s, kDefaults);
    const double m_corr = 1.0 - std::pow(kDefaults.beta1, step);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(d[i]) <= std::abs(s.m[i] / m_corr) / kDefaults.eps * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("bias correction: constant gradient gives m_hat = g within 4 ulps") {
  const std::vector<double> g{1.75, -0.5, 3.0};
  AdamState s = AdamState::zeros(3);
  for (int k = 1; k <= 12; ++k) {
    s = adam_update_state(s, g, kDefaults);
    const double corr = 1.0 - std::pow(kDefaults.beta1, k);
    for (std::size_t i = 0; i < 3; ++i) {
      const double m_hat = s.m[i] / corr;
      CHECK(std::abs(m_hat - g[i]) <=
            4.0 * std::abs(g[i]) * std::numeric_limits<double>::epsilon());
    }
  }
}

TEST_CASE("state updates are referentially transparent") {
  SeededRng rng(21);
  std::vector<double> g(3);
  for (auto& x : g) x = rng.normal();
  AdamState s{std::vector<double>{0.1, -0.2, 0.3}, std::vector<double>{0.5, 0.6, 0.7}, 4};
  const AdamState a = adam_update_state(s, g, kDefaults);
  const AdamState b = adam_update_state(s, g, kDefaults);
  CHECK(a.m == b.m);
  CHECK(a.v == b.v);
  CHECK(a.t == b.t);
}

TEST_CASE("AdamConfig validation") {
  AdamConfig bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = AdamConfig{};
  bad.eps = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
