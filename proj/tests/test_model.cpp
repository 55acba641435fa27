#include <doctest.h>

#include <cmath>
#include <limits>

#include "preagg/model.hpp"
#include "preagg/rng.hpp"
#include "preagg/value.hpp"

using namespace preagg;

TEST_CASE("ordinal value encoding preserves order and round-trips") {
  std::vector<double> xs = {-1e300, -2.0, -1.0, -0.5, 0.0, 0.25, 1.0, 2.0, 1e300,
                            -std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(ordinal_to_double(ordinal_value(xs[i])) == xs[i]);
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      CHECK(ordinal_value(xs[i]) < ordinal_value(xs[j]));
    }
  }
  CHECK(ordinal_value(-0.0) == ordinal_value(0.0));
  CHECK_THROWS_AS(ordinal_value(std::nan("")), std::invalid_argument);
}

TEST_CASE("ordinal encoding order property on random doubles") {
  Rng rng(99);
  for (int i = 0; i < 20000; ++i) {
    double a = (rng.next_double() - 0.5) * std::pow(10.0, rng.next_below(600) / 10.0 - 30.0);
    double b = (rng.next_double() - 0.5) * std::pow(10.0, rng.next_below(600) / 10.0 - 30.0);
    if (a < b) {
      CHECK(ordinal_value(a) < ordinal_value(b));
    } else if (a > b) {
      CHECK(ordinal_value(a) > ordinal_value(b));
    }
  }
}

TEST_CASE("value dictionary interns by lexicographic rank") {
  ValueDict dict = ValueDict::from_tokens({"cherry", "apple", "banana", "apple"});
  CHECK(dict.size() == 3);
  CHECK(dict.id_of("apple") == 0);
  CHECK(dict.id_of("banana") == 1);
  CHECK(dict.id_of("cherry") == 2);
  CHECK(dict.token_of(1) == "banana");
  CHECK_THROWS_AS(dict.id_of("durian"), std::out_of_range);
}

TEST_CASE("segment frequency evaluation") {
  Segment seg = Segment::from_counts({{0, 3}, {1, 1}});
  CHECK(seg.frequency(0) == 3);  // exact lookup
  CHECK(seg.frequency(7) == 0);
  CHECK(seg.total_weight() == 4);
  CHECK_THROWS_AS(Segment::from_counts({{0, -1}}), std::invalid_argument);
}

TEST_CASE("segment rank evaluation with inclusive bound") {
  Segment seg = Segment::from_counts({{1, 2}, {5, 3}});
  CHECK(seg.rank(4) == 2);
  CHECK(seg.rank(5) == 5);  // inclusive
  CHECK(seg.rank(0) == 0);
}

TEST_CASE("summary evaluation sums matching entries") {
  Summary s;
  s.entries = {{0, 4.0}};
  CHECK(s.frequency(1) == 0.0);  // absent value
  s.entries = {{0, 4.0}, {0, 1.0}};
  CHECK(s.frequency(0) == doctest::Approx(5.0));

  Summary r;
  r.entries = {{1, 2.5}, {9, 2.5}};
  CHECK(r.rank(0) == 0.0);
  CHECK(r.rank(9) == doctest::Approx(5.0));
}

TEST_CASE("rank is monotone and reaches total weight; frequencies sum to total") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<Value, std::int64_t>> counts;
    int distinct = 1 + static_cast<int>(rng.next_below(40));
    for (int i = 0; i < distinct; ++i) {
      counts.emplace_back(static_cast<Value>(rng.next_below(100)),
                          1 + static_cast<std::int64_t>(rng.next_below(20)));
    }
    Segment seg = Segment::from_counts(counts);
    std::int64_t freq_sum = 0;
    std::int64_t prev_rank = 0;
    Value max_value = seg.entries().back().first;
    for (const auto& [v, c] : seg.entries()) {
      freq_sum += seg.frequency(v);
      std::int64_t r = seg.rank(v);
      CHECK(r >= prev_rank);
      prev_rank = r;
    }
    CHECK(freq_sum == seg.total_weight());
    CHECK(seg.rank(max_value) == seg.total_weight());
  }
}

TEST_CASE("exact summary reproduces the segment") {
  Segment seg = Segment::from_counts({{2, 5}, {9, 1}, {4, 2}});
  Summary s = exact_summarize(seg);
  for (const auto& [v, c] : seg.entries()) {
    CHECK(s.frequency(v) == doctest::Approx(static_cast<double>(c)));
    CHECK(s.rank(v) == doctest::Approx(static_cast<double>(seg.rank(v))));
  }
}
