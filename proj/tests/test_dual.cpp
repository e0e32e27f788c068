#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "dspopt/dual.hpp"
#include "dspopt/generate.hpp"
#include "dspopt/primal.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using dspopt::BinomialMaxUniformLandscape;
using dspopt::Instance;
using dspopt::Rng;
using testsupport::make_instance;

namespace {

Instance two_by_two() {
  return make_instance(
      {3.0, 2.0},
      {BinomialMaxUniformLandscape(4, 0.6), BinomialMaxUniformLandscape(2, 0.3)},
      {{0.4, 1.0}, {0.7, 1.2}},
      {{0, 0, 0.8}, {0, 1, 0.5}, {1, 0, 0.3}, {1, 1, 0.9}});
}

}  // namespace

TEST_CASE("oracle at lambda = 1 shuts everything down") {
  const Instance instance = two_by_two();
  const auto out = dspopt::oracle(instance, {1.0, 1.0});
  double budget_sum = 0.0;
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    CHECK(out.bid_prices[e] == 0.0);
    CHECK(out.edge_scores[e] == 0.0);
    CHECK(out.allocation[e] == 0.0);
  }
  for (std::size_t k = 0; k < instance.n_campaigns(); ++k) {
    CHECK(out.subgradient[k] == instance.campaigns[k].budget);
    budget_sum += instance.campaigns[k].budget;
  }
  CHECK(out.dual_value == doctest::Approx(budget_sum).epsilon(1e-15));
  CHECK(dspopt::dual_value(instance, {1.0, 1.0}) ==
        doctest::Approx(budget_sum).epsilon(1e-15));
}

TEST_CASE("oracle at lambda = 0 bids truthfully") {
  const Instance instance = two_by_two();
  const auto out = dspopt::oracle(instance, {0.0, 0.0});
  for (std::size_t e = 0; e < instance.edges.size(); ++e) {
    CHECK(out.bid_prices[e] == instance.edges[e].ecpi);
  }
}

TEST_CASE("oracle rejects multipliers outside the box") {
  const Instance instance = two_by_two();
  CHECK_THROWS_AS(dspopt::oracle(instance, {1.2, 0.0}), dspopt::InputError);
  CHECK_THROWS_AS(dspopt::oracle(instance, {-0.1, 0.0}), dspopt::InputError);
  CHECK_THROWS_AS(dspopt::oracle(instance, {0.5}), dspopt::InputError);
}

TEST_CASE("oracle matches grid/vertex brute force") {
  const Instance instance = two_by_two();
  Rng rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const std::vector<double> lambda = {rng.uniform01(), rng.uniform01()};
    const double exact = dspopt::dual_value(instance, lambda);
    const double grid = testsupport::brute_force_dual_value(instance, lambda, 1000);
    const double enumerated =
        testsupport::brute_force_dual_value_enumerated(instance, lambda, 1000);
    CHECK(grid == doctest::Approx(enumerated).epsilon(1e-12));  // same oracle, two walks
    CHECK(std::abs(exact - grid) <= 1e-3);
    CHECK(exact >= grid - 1e-12);  // the grid can only undershoot the true max
  }
}

TEST_CASE("dual value dominates the multiplier term") {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance instance = testsupport::random_instance(rng);
    std::vector<double> lambda(instance.n_campaigns());
    for (double& v : lambda) v = rng.uniform01();
    double floor = 0.0;
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      floor += lambda[k] * instance.campaigns[k].budget;
    }
    CHECK(dspopt::dual_value(instance, lambda) >= floor - 1e-12);
  }
}

TEST_CASE("oracle allocation agrees with the greedy allocator") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance instance = testsupport::random_instance(rng);
    std::vector<double> lambda(instance.n_campaigns());
    for (double& v : lambda) v = rng.uniform01();
    const auto out = dspopt::oracle(instance, lambda);
    CHECK(dspopt::greedy_allocate(instance, out.edge_scores) == out.allocation);
  }
}

TEST_CASE("at lambda = 0 the selection tracks the largest ecpi") {
  // Strictly increasing win curves (binomial landscapes) and tie-free ecpi
  // values make the truthful score order match the ecpi order exactly.
  Rng rng(9);
  testsupport::RandomInstanceOptions opt;
  opt.allow_empirical = false;
  for (int trial = 0; trial < 20; ++trial) {
    const Instance instance = testsupport::random_instance(rng, opt);
    const auto out = dspopt::oracle(instance, std::vector<double>(instance.n_campaigns(), 0.0));
    for (std::size_t i = 0; i < instance.n_types(); ++i) {
      int chosen = -1;
      double best_ecpi = 0.0;
      for (int e : instance.edges_by_type[i]) {
        if (out.allocation[e] == 1.0) chosen = e;
        best_ecpi = std::max(best_ecpi, instance.edges[e].ecpi);
      }
      if (chosen >= 0) {
        CHECK(instance.edges[chosen].ecpi == doctest::Approx(best_ecpi).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("subgradient inequality holds across the box") {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Instance instance = testsupport::random_instance(rng);
    for (int pair = 0; pair < 100; ++pair) {
      std::vector<double> a(instance.n_campaigns()), b(instance.n_campaigns());
      for (double& v : a) v = rng.uniform01();
      for (double& v : b) v = rng.uniform01();
      const auto at_a = dspopt::oracle(instance, a);
      double lower = at_a.dual_value;
      for (std::size_t k = 0; k < a.size(); ++k) {
        lower += at_a.subgradient[k] * (b[k] - a[k]);
      }
      CHECK(dspopt::dual_value(instance, b) >= lower - 1e-9);
    }
  }
}

TEST_CASE("dual function is convex along random segments") {
  Rng rng(11);
  const Instance instance = testsupport::random_instance(rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(instance.n_campaigns()), b(instance.n_campaigns()), mid(a.size());
    for (double& v : a) v = rng.uniform01();
    for (double& v : b) v = rng.uniform01();
    const double alpha = rng.uniform01();
    for (std::size_t k = 0; k < a.size(); ++k) {
      mid[k] = alpha * a[k] + (1.0 - alpha) * b[k];
    }
    CHECK(dspopt::dual_value(instance, mid) <=
          alpha * dspopt::dual_value(instance, a) +
              (1.0 - alpha) * dspopt::dual_value(instance, b) + 1e-9);
  }
}

TEST_CASE("solve_dual stays at zero when budgets are slack") {
  // Budgets far above the truthful spend: the subgradient at 0 is positive
  // componentwise and projection pins every iterate to the origin.
  const Instance instance = make_instance(
      {2.0}, {BinomialMaxUniformLandscape(3, 0.5)}, {{100.0, 1.0}, {100.0, 1.0}},
      {{0, 0, 0.6}, {0, 1, 0.4}});
  const auto at_zero = dspopt::oracle(instance, {0.0, 0.0});
  for (double g : at_zero.subgradient) CHECK(g >= 0.0);

  const auto state = dspopt::solve_dual(instance, {.max_iters = 50});
  CHECK(state.best_lambda == std::vector<double>{0.0, 0.0});
  CHECK(state.best_value == doctest::Approx(at_zero.dual_value).epsilon(1e-15));
}

TEST_CASE("solve_dual matches a 1-D grid search") {
  const Instance instance =
      make_instance({4.0}, {BinomialMaxUniformLandscape(5, 0.7)}, {{0.6, 1.0}},
                    {{0, 0, 0.9}});
  double grid_min = 1e300;
  for (int g = 0; g <= 1000; ++g) {
    grid_min = std::min(grid_min, dspopt::dual_value(instance, {g / 1000.0}));
  }
  const auto state = dspopt::solve_dual(instance, {.max_iters = 20000});
  CHECK(std::abs(state.best_value - grid_min) <= 1e-3);
  CHECK(state.best_value >= grid_min - 1e-3);  // grid lands near the true minimum
}

TEST_CASE("solve_dual bookkeeping") {
  Rng rng(13);
  const Instance instance = testsupport::random_instance(rng);
  const auto state = dspopt::solve_dual(instance, {.max_iters = 200});
  CHECK(state.iteration == 200);
  CHECK(state.trajectory.size() == 200);
  for (const auto& row : state.trajectory) {
    CHECK(state.best_value <= row.dual_value + 1e-15);
  }
  for (double v : state.best_lambda) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK_THROWS_AS(dspopt::solve_dual(instance, {.max_iters = 0}), dspopt::InputError);
}

TEST_CASE("oracle cost is linear in the edge count") {
  // Fit the runtime exponent over |E| spanning two orders of magnitude.
  std::vector<double> log_edges, log_time;
  for (int types : {20, 200, 2000}) {
    dspopt::GeneratorConfig config;
    config.n_impression_types = types;
    config.seed = 5;
    const auto generated = dspopt::generate(config);
    const std::vector<double> lambda(generated.instance.n_campaigns(), 0.25);

    const int reps = std::max(1, 400000 / static_cast<int>(types));
    double best = 1e300;
    for (int batch = 0; batch < 3; ++batch) {
      const auto start = std::chrono::steady_clock::now();
      double sink = 0.0;
      for (int r = 0; r < reps; ++r) {
        sink += dspopt::oracle(generated.instance, lambda).dual_value;
      }
      const auto stop = std::chrono::steady_clock::now();
      CHECK(sink > 0.0);
      best = std::min(best, std::chrono::duration<double>(stop - start).count() / reps);
    }
    log_edges.push_back(std::log(static_cast<double>(dspopt::edge_count(generated.instance))));
    log_time.push_back(std::log(best));
  }
  // Least-squares slope of log time against log |E|.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_edges.size(); ++i) {
    mx += log_edges[i];
    my += log_time[i];
  }
  mx /= log_edges.size();
  my /= log_time.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < log_edges.size(); ++i) {
    num += (log_edges[i] - mx) * (log_time[i] - my);
    den += (log_edges[i] - mx) * (log_edges[i] - mx);
  }
  const double exponent = num / den;
  INFO("fitted exponent: ", exponent);
  CHECK(exponent >= 0.8);
  CHECK(exponent <= 1.2);
}
