#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <coev/mlp.hpp>
#include <coev/rng.hpp>

using namespace coev;
using Catch::Matchers::WithinAbs;

TEST_CASE("parameter counts: in*h weights + h biases + h weights + 1 bias") {
  CHECK(Mlp::parameter_count(20, 10) == 221);
  CHECK(Mlp::parameter_count(120, 10) == 1221);
  CHECK(Mlp::parameter_count(17, 10) == 191);
  CHECK(Mlp::parameter_count(1, 1) == 4);
  Mlp net(20, 10);
  CHECK(net.parameters().size() == 221);
}

TEST_CASE("weight initialisation is uniform in [-0.5, 0.5] and seed-deterministic") {
  Mlp a(8, 4), b(8, 4);
  Rng r1(5), r2(5);
  a.init_weights(r1);
  b.init_weights(r2);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    REQUIRE(a.parameters()[i] >= -0.5);
    REQUIRE(a.parameters()[i] < 0.5);
    REQUIRE(a.parameters()[i] == b.parameters()[i]);
  }
  // matches the raw stream: the k-th parameter is the k-th uniform draw - 0.5
  Rng raw(5);
  Mlp c(3, 2);
  Rng rc(5);
  c.init_weights(rc);
  for (const double w : c.parameters()) REQUIRE(w == raw.uniform01() - 0.5);
}

TEST_CASE("predictions stay inside the logistic range") {
  Mlp net(6, 3);
  Rng rng(11);
  net.init_weights(rng);
  std::vector<double> x(6);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& v : x) v = rng.uniform01();
    const double y = net.predict(x);
    REQUIRE(y > 0.0);
    REQUIRE(y < 1.0);
  }
  std::vector<double> wrong(5);
  CHECK_THROWS_AS(net.predict(wrong), std::invalid_argument);
}

TEST_CASE("analytic gradient matches central finite differences") {
  Mlp net(5, 3);
  Rng rng(2025);
  net.init_weights(rng);
  std::vector<double> x(5);
  for (auto& v : x) v = rng.uniform01();
  const double target = 0.3;

  std::vector<double> g(net.parameters().size());
  net.gradient(x, target, g);

  const double h = 1e-5;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w0 = net.parameters()[i];
    net.parameters()[i] = w0 + h;
    const double up = net.sample_loss(x, target);
    net.parameters()[i] = w0 - h;
    const double dn = net.sample_loss(x, target);
    net.parameters()[i] = w0;
    const double fd = (up - dn) / (2.0 * h);
    const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-6});
    REQUIRE(rel <= 1e-4);
  }
}

TEST_CASE("gradient leaves the weights untouched") {
  Mlp net(4, 2);
  Rng rng(3);
  net.init_weights(rng);
  const std::vector<double> before(net.parameters().begin(), net.parameters().end());
  std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  std::vector<double> g(net.parameters().size());
  net.gradient(x, 0.5, g);
  const std::vector<double> after(net.parameters().begin(), net.parameters().end());
  CHECK(before == after);
}

TEST_CASE("training fits a single sample and counts updates") {
  TrainingSet ts;
  ts.width = 3;
  const std::vector<double> x{0.2, 0.8, 0.5};
  ts.add(x, 0.7);

  Mlp net(3, 4);
  Rng rng(8);
  net.init_weights(rng);
  const double loss0 = net.sample_loss(x, 0.7);
  const std::uint64_t updates = net.train(ts, 500, 0.5, rng);
  CHECK(updates == 500);  // epochs * rows
  CHECK(net.sample_loss(x, 0.7) < loss0);
  CHECK_THAT(net.predict(x), WithinAbs(0.7, 0.02));
}

TEST_CASE("training orders a separable pair of inputs") {
  TrainingSet ts;
  ts.width = 1;
  const std::vector<double> lo{0.1}, hi{0.9};
  ts.add(lo, 0.2);
  ts.add(hi, 0.8);
  Mlp net(1, 3);
  Rng rng(21);
  net.init_weights(rng);
  net.train(ts, 2000, 0.5, rng);
  CHECK(net.predict(lo) < net.predict(hi));
  CHECK_THAT(net.predict(lo), WithinAbs(0.2, 0.05));
  CHECK_THAT(net.predict(hi), WithinAbs(0.8, 0.05));
}

TEST_CASE("training is deterministic in the rng seed") {
  TrainingSet ts;
  ts.width = 2;
  Rng data(4);
  std::vector<double> x(2);
  for (int i = 0; i < 12; ++i) {
    x[0] = data.uniform01();
    x[1] = data.uniform01();
    ts.add(x, data.uniform01());
  }
  Mlp a(2, 5), b(2, 5);
  Rng ra(9), rb(9);
  a.init_weights(ra);
  b.init_weights(rb);
  a.train(ts, 30, 0.1, ra);
  b.train(ts, 30, 0.1, rb);
  for (std::size_t i = 0; i < a.parameters().size(); ++i) {
    REQUIRE(a.parameters()[i] == b.parameters()[i]);
  }
  CHECK(a.train(ts, 1, 0.1, ra) == 12);  // one epoch = rows() updates
}

TEST_CASE("training set shape errors are caught") {
  TrainingSet ts;
  ts.width = 4;
  std::vector<double> bad(3, 0.0);
  CHECK_THROWS_AS(ts.add(bad, 0.5), std::invalid_argument);
  std::vector<double> good(4, 0.0);
  ts.add(good, 0.5);
  CHECK(ts.rows() == 1);
  Mlp net(5, 2);
  Rng rng(1);
  CHECK_THROWS_AS(net.train(ts, 1, 0.1, rng), std::invalid_argument);
  TrainingSet empty;
  empty.width = 5;
  CHECK(net.train(empty, 10, 0.1, rng) == 0);
}
