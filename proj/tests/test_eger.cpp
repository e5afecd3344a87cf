#include <doctest.h>

#include <algorithm>
#include <random>

#include "evdeblur/eger.hpp"
#include "support/test_util.hpp"

using namespace evd;
using testutil::random_stream;
using testutil::stream_of;

TEST_CASE("voxel_grid") {
  SUBCASE("empty stream accumulates nothing") {
    EventStream s = stream_of({}, 3, 2, {0.0, 1.0});
    VoxelGrid g = voxel_grid(s, 4);
    for (double v : g.data) CHECK(v == 0.0);
  }
  SUBCASE("bin index follows floor(N*t)") {
    EventStream s = stream_of({{0.59, 1, 0, 1}}, 2, 1, {0.0, 1.0});
    VoxelGrid g = voxel_grid(s, 5);
    CHECK(g.at(2, 0, 1) == 1.0);  // positive channel of bin 2
    double total = 0.0;
    for (double v : g.data) total += v;
    CHECK(total == 1.0);
  }
  SUBCASE("event at the span end lands in the last bin") {
    EventStream s = stream_of({{1.0, 0, 0, -1}}, 1, 1, {0.0, 1.0});
    VoxelGrid g = voxel_grid(s, 5);
    CHECK(g.at(5 + 4, 0, 0) == 1.0);  // negative channel of bin 4
  }
  SUBCASE("zero bins rejected") {
    EventStream s = stream_of({}, 1, 1, {0.0, 1.0});
    CHECK_THROWS_AS(voxel_grid(s, 0), Error);
  }
}

TEST_CASE("build_eger splits ten negative events around the target") {
  // N=5 over [0,1] with target [0.3, 0.6]
  std::vector<Event> events;
  const double times[10] = {0.05, 0.12, 0.22, 0.31, 0.4, 0.45, 0.55, 0.61, 0.8, 0.95};
  for (double t : times) events.push_back({t, 1, 2, -1});
  EventStream s = stream_of(std::move(events), 4, 4, {0.0, 1.0});
  EgerTensor e = build_eger(s, {0.3, 0.6}, 5);

  CHECK(e.channel_count() == 30);
  CHECK(e.n_bins == 5);
  // all mass in negative-polarity channels
  for (int sec = 0; sec < 3; ++sec) {
    for (int bin = 0; bin < 5; ++bin) {
      const int pos_ch = sec * 10 + bin;
      for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(e.at(pos_ch, y, x) == 0.0);
      }
    }
  }
  double mass[3] = {0.0, 0.0, 0.0};
  for (int sec = 0; sec < 3; ++sec) {
    for (int bin = 0; bin < 5; ++bin) mass[sec] += e.at(sec * 10 + 5 + bin, 2, 1);
  }
  CHECK(mass[0] == 3.0);  // events before 0.3
  CHECK(mass[1] == 4.0);  // events in [0.3, 0.6]
  CHECK(mass[2] == 3.0);  // events after 0.6
  // global bin indices survive the split
  CHECK(e.at(0 * 10 + 5 + 0, 2, 1) == 2.0);   // 0.05, 0.12 in bin 0
  CHECK(e.at(1 * 10 + 5 + 2, 2, 1) == 3.0);   // 0.4, 0.45, 0.55 in bin 2
}

TEST_CASE("degenerate and full targets") {
  std::mt19937 rng(21);
  EventStream s = random_stream(rng, 5, 4, 64);
  SUBCASE("instant target with no event exactly there leaves E2 empty") {
    EgerTensor e = build_eger(s, {0.123456, 0.123456}, 4);
    const std::size_t section = static_cast<std::size_t>(2 * 4) * 4 * 5;
    for (std::size_t i = 0; i < section; ++i) CHECK(e.data[section + i] == 0.0);
  }
  SUBCASE("full-span target drains E1 and E3") {
    EgerTensor e = build_eger(s, s.span, 4);
    VoxelGrid g = voxel_grid(s, 4);
    const std::size_t section = static_cast<std::size_t>(2 * 4) * 4 * 5;
    for (std::size_t i = 0; i < section; ++i) {
      CHECK(e.data[i] == 0.0);                  // E1
      CHECK(e.data[2 * section + i] == 0.0);    // E3
      CHECK(e.data[section + i] == g.data[i]);  // E2 equals the voxel grid
    }
  }
}

TEST_CASE("conservation, mass, nesting, and permutation safety") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    EventStream s = random_stream(rng, 6, 5, 50);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    for (int n : {1, 5, 16}) {
      EgerTensor e = build_eger(s, {a, b}, n);
      VoxelGrid g = voxel_grid(s, n);
      CHECK(e.section_sum().data == g.data);

      double mass = 0.0;
      for (double v : e.data) mass += v;
      CHECK(mass == static_cast<double>(s.events.size()));

      // enlarging the target moves mass into E2 only
      const double wider_a = a * 0.5;
      const double wider_b = b + (1.0 - b) * 0.5;
      EgerTensor e2 = build_eger(s, {wider_a, wider_b}, n);
      CHECK(e2.section_sum().data == g.data);
      const std::size_t section = static_cast<std::size_t>(2 * n) * s.height * s.width;
      for (std::size_t i = 0; i < section; ++i) {
        CHECK(e2.data[section + i] >= e.data[section + i]);
      }
    }
  }

  SUBCASE("equal-timestamp events may arrive in any order") {
    std::vector<Event> evs = {{0.5, 0, 0, 1}, {0.5, 1, 0, -1}, {0.5, 0, 1, 1}};
    EventStream s1 = stream_of(evs, 2, 2, {0.0, 1.0});
    std::reverse(evs.begin(), evs.end());
    EventStream s2 = stream_of(evs, 2, 2, {0.0, 1.0});
    CHECK(build_eger(s1, {0.4, 0.6}, 3).data == build_eger(s2, {0.4, 0.6}, 3).data);
  }
}

TEST_CASE("target outside the span is rejected") {
  EventStream s = stream_of({}, 2, 2, {0.0, 1.0});
  CHECK_THROWS_AS(build_eger(s, {0.5, 1.5}, 4), Error);
  CHECK_THROWS_AS(build_eger(s, {0.2, 0.8}, 0), Error);
}
