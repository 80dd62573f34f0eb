#include <doctest.h>

#include <limits>
#include <set>

#include "support.hpp"
#include "tshrink/error.hpp"
#include "tshrink/model.hpp"
#include "tshrink/rng.hpp"

using namespace tshrink;

TEST_CASE("dataset precomputes column statistics") {
  MatrixXd X(3, 2);
  X << 1, 2, 3, 4, 5, 6;
  VectorXd Y(3);
  Y << 1, -1, 2;
  const Dataset data(X, Y);
  CHECK(data.n() == 3);
  CHECK(data.p() == 2);
  CHECK(data.gram_diag()[0] == 35.0);
  CHECK(data.gram_diag()[1] == 56.0);
  CHECK(data.xty()[0] == 1.0 - 3.0 + 10.0);
  CHECK(data.xty()[1] == 2.0 - 4.0 + 12.0);
  CHECK(data.yty() == 6.0);
}

TEST_CASE("dataset rejects degenerate input") {
  MatrixXd X = MatrixXd::Ones(3, 2);
  VectorXd Y = VectorXd::Ones(3);
  CHECK_THROWS_AS(Dataset(MatrixXd(0, 2), VectorXd(0)), InputError);
  CHECK_THROWS_AS(Dataset(X, VectorXd::Ones(4)), InputError);
  MatrixXd zero_col = X;
  zero_col.col(1).setZero();
  CHECK_THROWS_AS(Dataset(zero_col, Y), InputError);
  MatrixXd nan = X;
  nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(Dataset(nan, Y), InputError);
  VectorXd inf_y = Y;
  inf_y[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset(X, inf_y), InputError);
}

TEST_CASE("hyperparameter validation") {
  Hyperparameters h;
  h.bn = 0.1;
  CHECK_NOTHROW(h.validate(10));
  auto bad = h;
  bad.a0 = 1.0;
  CHECK_THROWS_AS(bad.validate(10), ConfigError);
  bad = h;
  bad.bn = 0.0;
  CHECK_THROWS_AS(bad.validate(10), ConfigError);
  bad = h;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(10), ConfigError);
  bad = h;
  bad.blocks = 11;
  CHECK_THROWS_AS(bad.validate(10), ConfigError);
  bad.blocks = 0;
  CHECK_THROWS_AS(bad.validate(10), ConfigError);
}

TEST_CASE("state invariants") {
  VariationalState s;
  s.mu = VectorXd::Zero(2);
  s.a = VectorXd::Constant(2, 2.5);
  s.b = VectorXd::Constant(2, 0.1);
  CHECK_NOTHROW(s.check_invariants());
  s.a[1] = 1.0;
  CHECK_THROWS_AS(s.check_invariants(), NumericError);
  s.a[1] = 2.0;
  s.b[0] = 0.0;
  CHECK_THROWS_AS(s.check_invariants(), NumericError);
  s.b[0] = 1.0;
  s.sigma = 0.0;
  CHECK_THROWS_AS(s.check_invariants(), NumericError);
}

TEST_CASE("block partition is contiguous and near-equal") {
  for (const Index p : {1, 7, 100, 401, 1000}) {
    for (const Index blocks : {Index{1}, Index{2}, Index{3}, Index{10}, p}) {
      if (blocks > p) continue;
      const auto ranges = partition_blocks(p, blocks);
      REQUIRE(static_cast<Index>(ranges.size()) == blocks);
      Index next = 0;
      Index smallest = p;
      Index largest = 0;
      for (const auto& r : ranges) {
        CHECK(r.begin == next);
        next += r.size;
        smallest = std::min(smallest, r.size);
        largest = std::max(largest, r.size);
      }
      CHECK(next == p);
      CHECK(largest - smallest <= 1);
    }
  }
  CHECK_THROWS_AS(partition_blocks(5, 6), ConfigError);
  CHECK_THROWS_AS(partition_blocks(5, 0), ConfigError);
}

TEST_CASE("named random streams are deterministic and distinct") {
  Rng a = make_rng(42, Stream::Design, 3);
  Rng b = make_rng(42, Stream::Design, 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  std::set<std::uint64_t> firsts;
  for (const Stream s : {Stream::Design, Stream::Noise, Stream::SignalPositions, Stream::Gibbs, Stream::MarginalKl}) {
    for (std::uint64_t index = 0; index < 20; ++index) {
      for (std::uint64_t seed : {0ULL, 1ULL, 42ULL}) firsts.insert(make_rng(seed, s, index)());
    }
  }
  CHECK(firsts.size() == 5 * 20 * 3);
}
