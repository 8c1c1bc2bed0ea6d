#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "epsnet/fixtures.hpp"
#include "epsnet/select.hpp"

using namespace epsnet;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("exact argmax on the three-action fixture") {
  const RewardModel model = example1_model();
  REQUIRE(exact_argmax(model, {vec2(1, 0)}) == 0);  // 1 beats 0.9 and -0.1
  REQUIRE(exact_argmax(model, {vec2(0, 1)}) == 2);  // 1 beats 0 and 0.1

  Eigen::MatrixXd dup(2, 2);
  dup << 0.3, 0.4, 0.3, 0.4;
  const RewardModel dup_model = RewardModel::linear(make_explicit_space(dup));
  REQUIRE(exact_argmax(dup_model, {vec2(1, 1)}) == 0);
}

TEST_CASE("thompson oracle agrees with exact argmax on separated arms") {
  Eigen::MatrixXd a(2, 1);
  a << 5.0, 0.0;
  const RewardModel model = RewardModel::linear(make_explicit_space(a));
  Eigen::VectorXd theta(1);
  theta << 1.0;
  const OracleSpec spec = OracleSpec::thompson(300);
  int agree = 0;
  for (int s = 0; s < 200; ++s) {
    Rng rng = make_rng(1000 + static_cast<std::uint64_t>(s));
    if (thompson_argmax(model, {theta}, spec, rng) ==
        exact_argmax(model, {theta}))
      ++agree;
  }
  REQUIRE(agree >= 198);  // >= 0.99 over 200 seeds
}

TEST_CASE("thompson oracle on a single action returns it") {
  Eigen::MatrixXd a(1, 1);
  a << -2.0;
  const RewardModel model = RewardModel::linear(make_explicit_space(a));
  Eigen::VectorXd theta(1);
  theta << 3.0;
  Rng rng = make_rng(1);
  REQUIRE(thompson_argmax(model, {theta}, OracleSpec::thompson(5), rng) == 0);
}

TEST_CASE("thompson oracle finds a3 under theta = e2") {
  const RewardModel model = example1_model();
  const OracleSpec spec = OracleSpec::thompson(300);
  int hits = 0;
  for (int s = 0; s < 200; ++s) {
    Rng rng = make_rng(500 + static_cast<std::uint64_t>(s));
    if (thompson_argmax(model, {vec2(0, 1)}, spec, rng) == 2) ++hits;
  }
  REQUIRE(hits >= 190);  // >= 0.95 over 200 seeds
}

TEST_CASE("distinct-count selection solves the fixture exactly") {
  const RewardModel model = example1_model();
  const SelectionResult res =
      epsilon_net_select(model, example1_distribution(), OracleSpec::exact(),
                         StopRule::distinct_count(2), 9);
  REQUIRE(res.complete);
  REQUIRE(std::set<int>(res.chosen.begin(), res.chosen.end()) ==
          std::set<int>{0, 2});
}

TEST_CASE("iterations mode draws exactly K instances") {
  const RewardModel model = example1_model();
  const SelectionResult res =
      epsilon_net_select(model, example1_distribution(), OracleSpec::exact(),
                         StopRule::iterations(1), 3);
  REQUIRE(res.iterations_used == 1);
  REQUIRE(res.chosen.size() == 1);
  REQUIRE(res.trace.size() == 1);
}

TEST_CASE("selection frequencies are uniform on the orthonormal space") {
  const RewardModel model = RewardModel::linear(make_orthonormal_space(8));
  const SelectionResult res = epsilon_net_select(
      model, model.default_instance_distribution(), OracleSpec::exact(),
      StopRule::iterations(10000), 17);
  std::vector<long> counts(8, 0);
  for (const auto& e : res.trace) ++counts[static_cast<std::size_t>(e.index)];
  for (long c : counts) {
    const double freq = static_cast<double>(c) / 10000.0;
    REQUIRE(freq >= 1.0 / 8.0 - 0.02);
    REQUIRE(freq <= 1.0 / 8.0 + 0.02);
  }
}

TEST_CASE("trace cluster frequencies converge to the importance measure") {
  // synthetic q over four singleton clusters
  const SyntheticQFixture fix = make_synthetic_q({0.4, 0.3, 0.2, 0.1});
  const long draws = 20000;
  const SelectionResult res = epsilon_net_select(
      fix.model, fix.dist, OracleSpec::exact(),
      StopRule::iterations(static_cast<int>(draws)), 23);
  std::vector<long> counts(4, 0);
  for (const auto& e : res.trace) ++counts[static_cast<std::size_t>(e.index)];
  for (int i = 0; i < 4; ++i) {
    const double q = fix.q[static_cast<std::size_t>(i)];
    const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(draws));
    REQUIRE(std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / draws - q) <=
            3.0 * se);
  }
}

TEST_CASE("argmax sequence is invariant under constant action shifts") {
  Rng seed_rng = make_rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd pts(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int d = 0; d < 2; ++d) pts(i, d) = normal(seed_rng);
  Eigen::MatrixXd shifted = pts;
  shifted.col(0).array() += 2.5;
  shifted.col(1).array() -= 1.0;
  const RewardModel base = RewardModel::linear(make_explicit_space(pts));
  const RewardModel moved = RewardModel::linear(make_explicit_space(shifted));
  const auto dist = base.default_instance_distribution();
  const SelectionResult a = epsilon_net_select(base, dist, OracleSpec::exact(),
                                               StopRule::iterations(200), 77);
  const SelectionResult b = epsilon_net_select(moved, dist, OracleSpec::exact(),
                                               StopRule::iterations(200), 77);
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    REQUIRE(a.trace[i].index == b.trace[i].index);
}

TEST_CASE("selection is deterministic and flags incomplete runs") {
  const RewardModel model = example1_model();
  const auto dist = example1_distribution();
  const SelectionResult a = epsilon_net_select(model, dist, OracleSpec::exact(),
                                               StopRule::iterations(50), 5);
  const SelectionResult b = epsilon_net_select(model, dist, OracleSpec::exact(),
                                               StopRule::iterations(50), 5);
  REQUIRE(a.to_json() == b.to_json());

  // only two actions are ever optimal, so three distinct are unreachable
  const SelectionResult c = epsilon_net_select(
      model, dist, OracleSpec::exact(), StopRule::distinct_count(3, 100), 5);
  REQUIRE_FALSE(c.complete);
  REQUIRE(c.iterations_used == 100);
  REQUIRE(c.chosen.size() == 2);
}

TEST_CASE("selection result json has the documented shape") {
  const RewardModel model = example1_model();
  const SelectionResult res =
      epsilon_net_select(model, example1_distribution(), OracleSpec::exact(),
                         StopRule::iterations(3), 1);
  const nlohmann::json j = res.to_json();
  REQUIRE(j.contains("chosen"));
  REQUIRE(j.contains("iterations_used"));
  REQUIRE(j["trace"].size() == 3);
  REQUIRE(j["trace"][0].contains("iter"));
  REQUIRE(j["trace"][0].contains("seed"));
  REQUIRE(j["trace"][0].contains("index"));
}
