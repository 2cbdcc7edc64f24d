#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "kgtmm/rng.hpp"

using namespace kgtmm;

TEST_CASE("identical stream addresses reproduce the same sequence") {
  RngStream a(42, StreamPurpose::kLocalStep, 3, 17, 2);
  RngStream b(42, StreamPurpose::kLocalStep, 3, 17, 2);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("any change of the stream address changes the sequence") {
  auto first = [](RngStream s) { return s.next_u64(); };
  const std::uint64_t base =
      first(RngStream(42, StreamPurpose::kLocalStep, 3, 17, 2));
  CHECK(base != first(RngStream(43, StreamPurpose::kLocalStep, 3, 17, 2)));
  CHECK(base != first(RngStream(42, StreamPurpose::kCentralStep, 3, 17, 2)));
  CHECK(base != first(RngStream(42, StreamPurpose::kLocalStep, 4, 17, 2)));
  CHECK(base != first(RngStream(42, StreamPurpose::kLocalStep, 3, 18, 2)));
  CHECK(base != first(RngStream(42, StreamPurpose::kLocalStep, 3, 17, 3)));
}

TEST_CASE("distinct addresses rarely collide on their first draws") {
  std::set<std::uint64_t> seen;
  int count = 0;
  for (std::uint64_t client = 0; client < 20; ++client)
    for (std::uint64_t round = 0; round < 20; ++round)
      for (std::uint64_t step = 0; step < 5; ++step) {
        RngStream s(7, StreamPurpose::kLocalStep, client, round, step);
        seen.insert(s.next_u64());
        ++count;
      }
  CHECK(static_cast<int>(seen.size()) == count);
}

TEST_CASE("uniform lies in [0, 1)") {
  RngStream s(1, StreamPurpose::kTest);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_index covers [0, n) and hits every cell") {
  RngStream s(2, StreamPurpose::kTest);
  std::vector<int> hits(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t k = s.uniform_index(10);
    REQUIRE(k < 10);
    ++hits[k];
  }
  for (int c : hits) CHECK(c > 800);  // fair to ~2 sigma slack
}

TEST_CASE("normal draws have standard moments") {
  RngStream s(3, StreamPurpose::kTest);
  const int N = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = s.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / N;
  const double var = sum_sq / N - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("normal_matrix fills column-major deterministically") {
  RngStream a(5, StreamPurpose::kTest);
  RngStream b(5, StreamPurpose::kTest);
  Eigen::MatrixXd M = a.normal_matrix(3, 2);
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 3; ++i) CHECK(M(i, j) == b.normal());
}
