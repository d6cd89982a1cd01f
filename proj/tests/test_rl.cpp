#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "slab/errors.hpp"
#include "slab/qnetwork.hpp"
#include "slab/rl.hpp"
#include "slab/training.hpp"

using namespace slab;

namespace {

QNetwork random_net(std::uint64_t seed, std::vector<int> hidden = {64, 64}) {
  QNetwork net(std::move(hidden));
  RngStream rng(seed);
  net.init_random(rng);
  return net;
}

// Straightforward re-implementation of the forward pass from the layout.
QValues reference_forward(const QNetwork& net, const State& s) {
  const auto& dims = net.shape();
  const auto p = net.params();
  std::vector<double> x(s.begin(), s.end());
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    std::vector<double> y(static_cast<std::size_t>(dims[l + 1]));
    for (int o = 0; o < dims[l + 1]; ++o) {
      double acc = p[net.bias_offset(l) + o];
      for (int i = 0; i < dims[l]; ++i) {
        acc += p[net.weight_offset(l) + static_cast<std::size_t>(o * dims[l] + i)] * x[i];
      }
      y[o] = (l + 2 < dims.size()) ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  QValues q{};
  std::copy(x.begin(), x.end(), q.begin());
  return q;
}

struct Batch {
  std::vector<State> s;
  std::vector<int> a;
  std::vector<double> t;
};

Batch random_batch(std::size_t n, RngStream& rng) {
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.s.push_back({rng.uniform(), rng.uniform()});
    b.a.push_back(static_cast<int>(rng.below(4)));
    b.t.push_back(-3.0 * rng.uniform());
  }
  return b;
}

}  // namespace

TEST_CASE("forward pass") {
  QNetwork zero;
  for (double q : zero.forward({0.3, 0.8})) CHECK(q == 0.0);

  QNetwork net = random_net(11);
  const State s{0.37, 0.91};
  const QValues base = net.forward(s);
  const QValues ref = reference_forward(net, s);
  for (int a = 0; a < kNumActions; ++a) CHECK(std::fabs(base[a] - ref[a]) < 1e-12);
  CHECK(net.forward(s) == base);

  const std::size_t last = net.num_layers() - 1;
  for (std::size_t i = net.weight_offset(last); i < net.num_params(); ++i) net.params()[i] *= -2.5;
  const QValues scaled = net.forward(s);
  for (int a = 0; a < kNumActions; ++a) CHECK(scaled[a] == doctest::Approx(-2.5 * base[a]));

  CHECK(net.num_params() == 2 * 64 + 64 + 64 * 64 + 64 + 64 * 4 + 4);
}

TEST_CASE("huber") {
  CHECK(huber(0.5, 1.0) == doctest::Approx(0.125));
  CHECK(huber(-3.0, 1.0) == doctest::Approx(2.5));
  CHECK(huber(2.0, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("gradient matches central differences") {
  QNetwork net = random_net(12);
  RngStream rng(13);
  const Batch b = random_batch(8, rng);
  std::vector<double> grad;
  net.loss_and_gradient(b.s, b.a, b.t, 1.0, grad);
  REQUIRE(grad.size() == net.num_params());
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const double keep = net.params()[i];
    net.params()[i] = keep + eps;
    const double up = net.loss(b.s, b.a, b.t, 1.0);
    net.params()[i] = keep - eps;
    const double down = net.loss(b.s, b.a, b.t, 1.0);
    net.params()[i] = keep;
    const double fd = (up - down) / (2.0 * eps);
    const double scale = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-7});
    worst = std::max(worst, std::fabs(fd - grad[i]) / scale);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("training steps") {
  TrainerConfig cfg;
  cfg.gamma = 0.0;
  QNetwork net = random_net(14);
  const QNetwork target = net;

  // Zero rewards with gamma 0: targets are 0; make predictions match by zeroing output.
  std::vector<Experience> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({{0.1 * i, 0.5}, i % 4, 0.0, {0.2, 0.2}});
  for (auto& e : batch) e.r = net.forward(e.s)[e.a];
  const QNetwork before = net;
  AdamOptimizer opt(cfg.learn_rate);
  CHECK(qnet_train_batch(net, target, batch, cfg, opt) == 0.0);
  CHECK(net == before);

  RngStream rng(15);
  std::vector<Experience> fixed;
  for (int i = 0; i < 16; ++i) {
    fixed.push_back({{rng.uniform(), rng.uniform()}, static_cast<int>(rng.below(4)),
                     -1.0 - 4.0 * rng.uniform(), {0.0, 0.0}});
  }
  AdamOptimizer fast(1e-2);
  double loss = 1.0;
  for (int step = 0; step < 500 && loss >= 1e-3; ++step) {
    loss = qnet_train_batch(net, target, fixed, cfg, fast);
  }
  CHECK(loss < 1e-3);

  std::vector<Experience> bad{{{0.5, 0.5}, 1, std::nan(""), {0.0, 0.0}}};
  CHECK_THROWS_AS(qnet_train_batch(net, target, bad, cfg, opt), ConvergenceError);
  CHECK_THROWS_AS(qnet_train_batch(net, target, std::vector<Experience>{}, cfg, opt), DomainError);
}

TEST_CASE("ucb action") {
  CHECK(ucb_action({0, 0, 0, 0}, {0, 0, 0, 0}) == 0);
  CHECK(ucb_action({1, 3, 2, 0}, {5, 5, 5, 5}) == 1);
  CHECK(ucb_action({1, 1, 1, 1}, {100, 100, 100, 1}) == 3);
  CHECK(ucb_action({9, 9, 9, -9}, {3, 4, 0, 0}) == 2);
  // A constant shift of the Q-values never changes the choice.
  for (double c : {-50.0, 0.0, 7.0}) {
    CHECK(ucb_action({1 + c, 3 + c, 2 + c, c}, {5, 7, 2, 9}) ==
          ucb_action({1, 3, 2, 0}, {5, 7, 2, 9}));
    CHECK(greedy_action({1 + c, 3 + c, 2 + c, c}) == 1);
  }
}

TEST_CASE("visit counts") {
  VisitCounts v;
  CHECK(VisitCounts::bin_index({0.0, 0.0}) == 0);
  CHECK(VisitCounts::bin_index({1.0, 1.0}) == 99);
  CHECK(VisitCounts::bin_index({0.15, 0.95}) != VisitCounts::bin_index({0.25, 0.95}));
  v.increment({0.15, 0.95}, 2);
  v.increment({0.16, 0.99}, 2);
  CHECK(v.at({0.11, 0.91})[2] == 2);
  CHECK(v.at({0.11, 0.91})[0] == 0);
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(5);
  for (int i = 0; i < 12; ++i) {
    buf.push({{0.0, 0.0}, 0, -static_cast<double>(i), {0.0, 0.0}});
    CHECK(buf.size() <= 5);
  }
  CHECK(buf.items().front().r == -7.0);
  RngStream rng(16);
  for (int rep = 0; rep < 50; ++rep) {
    const auto sample = buf.sample(4, rng);
    std::set<double> seen;
    for (const auto& e : sample) seen.insert(e.r);
    CHECK(seen.size() == 4);
  }
  CHECK(buf.sample(10, rng).size() == 5);
  CHECK_THROWS_AS(ReplayBuffer(0), DomainError);
}

TEST_CASE("chain MDP matches value iteration") {
  // Three states on a chain; action a moves right (a odd) or stays (a even).
  const std::array<State, 3> states{{{0.1, 0.2}, {0.5, 0.5}, {0.9, 0.8}}};
  auto next = [](int s, int a) { return (a % 2 == 1) ? (s + 1) % 3 : s; };
  auto reward = [](int s, int a) { return -1.0 - 0.5 * a - (s == 2 ? 1.0 : 0.0); };
  const double gamma = 0.5;

  std::array<std::array<double, 4>, 3> q{};
  for (int it = 0; it < 200; ++it) {
    auto nq = q;
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 4; ++a) {
        const auto& row = q[static_cast<std::size_t>(next(s, a))];
        nq[s][a] = reward(s, a) + gamma * *std::max_element(row.begin(), row.end());
      }
    }
    q = nq;
  }

  TrainerConfig cfg;
  cfg.gamma = gamma;
  std::vector<Experience> all;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 4; ++a) all.push_back({states[s], a, reward(s, a), states[next(s, a)]});
  }
  QNetwork net = random_net(17);
  QNetwork target = net;
  AdamOptimizer opt(1e-3);
  for (int step = 1; step <= 6000; ++step) {
    qnet_train_batch(net, target, all, cfg, opt);
    if (step % 50 == 0) target = net;
  }
  AdamOptimizer fine(1e-4);
  for (int step = 1; step <= 3000; ++step) {
    qnet_train_batch(net, target, all, cfg, fine);
    if (step % 50 == 0) target = net;
  }
  double worst = 0.0;
  for (int s = 0; s < 3; ++s) {
    const QValues got = net.forward(states[s]);
    for (int a = 0; a < 4; ++a) worst = std::max(worst, std::fabs(got[a] - q[s][a]));
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("myopic learner tracks mean reward") {
  TrainerConfig cfg;
  cfg.gamma = 0.0;
  cfg.total_episodes = 1;
  RngStream rng(18);
  auto mean_reward = [](const State& s, int a) { return -1.0 - s[0] - 0.5 * a * s[1]; };
  const double sigma = 0.5;
  std::vector<Experience> data;
  for (int i = 0; i < 8000; ++i) {
    const State s{rng.uniform(), rng.uniform()};
    const int a = static_cast<int>(rng.below(4));
    // Box-Muller
    const double z = std::sqrt(-2.0 * std::log(rng.uniform_pos())) *
                     std::cos(2.0 * M_PI * rng.uniform());
    data.push_back({s, a, mean_reward(s, a) + sigma * z, {0.0, 0.0}});
  }
  QNetwork net = random_net(19);
  const QNetwork target = net;
  AdamOptimizer opt(1e-3);
  ReplayBuffer buf(data.size());
  for (const auto& e : data) buf.push(e);
  for (int step = 0; step < 4000; ++step) {
    const auto batch = buf.sample(64, rng);
    qnet_train_batch(net, target, batch, cfg, opt);
  }
  const std::array<std::pair<State, int>, 5> probes{
      {{{0.15, 0.15}, 0}, {{0.45, 0.75}, 1}, {{0.85, 0.35}, 2}, {{0.55, 0.55}, 3}, {{0.25, 0.95}, 3}}};
  for (const auto& [center, a] : probes) {
    double sum = 0.0;
    int n = 0;
    for (const auto& e : data) {
      if (e.a == a && VisitCounts::bin_index(e.s) == VisitCounts::bin_index(center)) {
        sum += e.r;
        ++n;
      }
    }
    REQUIRE(n > 5);
    const double se = sigma / std::sqrt(n);
    CHECK(std::fabs(net.forward(center)[a] - sum / n) < 3.0 * se + 0.05);
  }
}

TEST_CASE("learner syncs its target on schedule") {
  TrainerConfig cfg;
  cfg.target_sync_period = 3;
  cfg.batch_size = 8;
  DqnLearner learner(cfg);
  CHECK(learner.network() == learner.target());
  CHECK(std::isnan(learner.end_episode()));
  RngStream rng(20);
  for (int i = 0; i < 40; ++i) {
    learner.push({{rng.uniform(), rng.uniform()}, static_cast<int>(rng.below(4)), -2.0,
                  {rng.uniform(), rng.uniform()}});
  }
  const QNetwork frozen = learner.target();
  CHECK(std::isfinite(learner.end_episode()));
  CHECK(learner.target() == frozen);
  CHECK(!(learner.network() == frozen));
  CHECK(learner.episodes() == 2);
  learner.end_episode();
  CHECK(learner.target() == learner.network());

  const State s{0.42, 0.42};
  const int first = learner.explore(s);
  CHECK(learner.visits().at(s)[static_cast<std::size_t>(first)] == 1);
}

TEST_CASE("trainer config validation") {
  TrainerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainerConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainerConfig{};
  cfg.hidden = {64, 0};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  const QNetwork net = random_net(21, {8, 5});
  std::stringstream ss;
  save_checkpoint(ss, net);
  const QNetwork back = load_checkpoint(ss);
  CHECK(back == net);
  CHECK(back.forward({0.3, 0.6}) == net.forward({0.3, 0.6}));

  std::stringstream bad1("{\"format\":\"nope\"}");
  CHECK_THROWS_AS(load_checkpoint(bad1), ConfigError);
  std::stringstream bad2("{\"format\":\"slab-qnetwork-v1\",\"shape\":[2,3,4],\"params\":[1,2]}");
  CHECK_THROWS_AS(load_checkpoint(bad2), ConfigError);
  std::stringstream bad3("[1,2,3]");
  CHECK_THROWS_AS(load_checkpoint(bad3), ConfigError);
  std::stringstream bad4("{\"format\":\"slab-qnetwork-v1\",\"shape\":\"x\"}");
  CHECK_THROWS_AS(load_checkpoint(bad4), ConfigError);
}

TEST_CASE("state encoding") {
  auto nodes = make_cluster(4, 10.0);
  ClusterView view{nodes};
  JobSpec small{0, 0.0, 1, 10.0, 1.0};
  CHECK(encode_state(view, small) == State{0.0, 0.0});
  JobSpec big{1, 0.0, 5, 300.0, 1.0};
  CHECK(encode_state(view, big)[1] == 1.0);
  JobSpec mid{2, 0.0, 1, 100.0, 1.0};
  CHECK(encode_state(view, mid)[1] == doctest::Approx(0.5));

  nodes[0].occupied = 10.0;
  nodes[1].occupied = 5.0;
  nodes[2].occupied = 2.0;
  nodes[3].occupied = 2.0;
  view.nodes = nodes;
  JobSpec two{3, 0.0, 2, 10.0, 1.0};
  CHECK(encode_state(view, two)[0] == doctest::Approx(0.2));
  JobSpec many{4, 0.0, 30, 10.0, 1.0};
  CHECK(encode_state(view, many)[0] == 1.0);
}

TEST_CASE("short training run") {
  TrainerConfig cfg;
  cfg.total_episodes = 4;
  cfg.episode_jobs = 32;
  cfg.batch_size = 16;
  cfg.seed = 5;
  const auto a = run_training(reference_params(), 0.4, cfg);
  const auto b = run_training(reference_params(), 0.4, cfg);
  CHECK(!a.unstable);
  REQUIRE(a.curve.size() == 4);
  CHECK(a.net == b.net);
  for (const auto& e : a.curve) {
    CHECK(e.mean_reward <= -1.0);
    CHECK(e.mean_reward >= -cfg.reward_clip);
  }
  std::ostringstream out;
  write_learning_curve_csv(out, a.curve);
  CHECK(out.str().rfind("episode,mean_loss,mean_reward\n", 0) == 0);
}
