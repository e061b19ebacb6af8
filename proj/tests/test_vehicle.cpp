#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "skiff/errors.hpp"
#include "skiff/vehicle.hpp"

using namespace skiff;
using std::numbers::pi;

TEST_CASE("angle wrapping") {
  CHECK(vehicle::wrap_angle(0.0) == 0.0);
  CHECK(vehicle::wrap_angle(pi) == doctest::Approx(pi));
  CHECK(vehicle::wrap_angle(-pi) == doctest::Approx(pi));
  CHECK(vehicle::wrap_angle(3.0 * pi) == doctest::Approx(pi));
  CHECK(vehicle::wrap_angle(pi + 0.1) == doctest::Approx(-pi + 0.1));
  CHECK(vehicle::wrap_angle(-0.25) == doctest::Approx(-0.25));

  CHECK(vehicle::wrap_heading(0.0) == 0.0);
  CHECK(vehicle::wrap_heading(360.0) == 0.0);
  CHECK(vehicle::wrap_heading(-10.0) == doctest::Approx(350.0));
  CHECK(vehicle::wrap_heading(725.0) == doctest::Approx(5.0));

  CHECK(vehicle::wrap_longitude(180.0) == doctest::Approx(180.0));
  CHECK(vehicle::wrap_longitude(-180.0) == doctest::Approx(180.0));
  CHECK(vehicle::wrap_longitude(181.0) == doctest::Approx(-179.0));
  CHECK(vehicle::wrap_longitude(-75.5) == doctest::Approx(-75.5));

  // Wrapping composes: wrap(a + b) == wrap(wrap(a) + wrap(b)).
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double a = angle(rng), b = angle(rng);
    CHECK(vehicle::wrap_angle(a + b) ==
          doctest::Approx(vehicle::wrap_angle(vehicle::wrap_angle(a) +
                                              vehicle::wrap_angle(b)))
              .epsilon(1e-12));
  }
}

TEST_CASE("published channel models at the default period") {
  const auto surge = vehicle::surge_model();
  REQUIRE(surge.state_dim() == 3);
  const double es = 0.695915092238348;  // e^{-0.66397 * 0.546}
  CHECK(surge.A(0, 0) == 1.0);
  CHECK(surge.A(0, 1) == doctest::Approx(1.50625 * (1.0 - es)).epsilon(1e-12));
  CHECK(surge.A(0, 2) == 0.0);
  CHECK(surge.A(1, 1) == doctest::Approx(es).epsilon(1e-12));
  CHECK(surge.A(2, 0) == 1.0);
  CHECK(surge.B(0) ==
        doctest::Approx(2.4012977021194404).epsilon(1e-12));  // with the T term
  CHECK(surge.B(1) == doctest::Approx(0.4580278923159891).epsilon(1e-12));
  CHECK(surge.B(2) == 0.0);
  CHECK(surge.C(0) == doctest::Approx(1.4162));
  CHECK(surge.C(1) == 0.0);
  CHECK(surge.C(2) == doctest::Approx(-1.4162));
  CHECK(surge.sample_period == doctest::Approx(0.546));

  const auto heading = vehicle::heading_model();
  const double eh = 0.369694037910797;  // e^{-1.82249 * 0.546}
  CHECK(heading.A(0, 1) ==
        doctest::Approx(0.5487 * (1.0 - eh)).epsilon(1e-12));
  CHECK(heading.A(1, 1) == doctest::Approx(eh).epsilon(1e-12));
  CHECK(heading.B(0) ==
        doctest::Approx(0.6600045233818796).epsilon(1e-12));  // no T term
  CHECK(heading.B(1) == doctest::Approx(0.3458488813983455).epsilon(1e-12));
  CHECK(heading.C(0) == doctest::Approx(0.200474));
  CHECK(heading.C(2) == doctest::Approx(-0.200474));
}

TEST_CASE("local plane projection") {
  vehicle::SensorRecord origin;
  origin.latitude = 40.0;
  origin.longitude = -75.5;

  SUBCASE("frozen meter-per-degree references") {
    vehicle::SensorRecord north = origin;
    north.latitude += 1e-5;
    const auto [e1, n1] = vehicle::to_local_enu(north, origin);
    // 40 + 1e-5 - 40 quantizes at ~3e-10 relative, so the tolerance sits
    // above that but far below any wrong-radius or missing-cosine error.
    CHECK(e1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(n1 == doctest::Approx(1.11195080233533).epsilon(1e-8));

    vehicle::SensorRecord origin60;
    origin60.latitude = 60.0;
    vehicle::SensorRecord east = origin60;
    east.longitude += 1e-5;
    const auto [e2, n2] = vehicle::to_local_enu(east, origin60);
    CHECK(e2 == doctest::Approx(0.555975401167665).epsilon(1e-10));
    CHECK(n2 == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("round trip") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> offset(-900.0, 900.0);
    for (int i = 0; i < 50; ++i) {
      const double east = offset(rng), north = offset(rng);
      const auto rec = vehicle::from_local_enu(east, north, origin, 1.0, 45.0);
      const auto [e, n] = vehicle::to_local_enu(rec, origin);
      CHECK(e == doctest::Approx(east).epsilon(1e-9));
      CHECK(n == doctest::Approx(north).epsilon(1e-9));
    }
  }

  SUBCASE("dateline wrap") {
    vehicle::SensorRecord west;
    west.latitude = 0.0;
    west.longitude = 179.99999;
    vehicle::SensorRecord east = west;
    east.longitude = -179.99999;  // 2e-5 degrees further east
    const auto [e, n] = vehicle::to_local_enu(east, west);
    CHECK(e == doctest::Approx(2.22390160467066).epsilon(1e-8));
    CHECK(n == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("rejects fixes beyond the small-angle window") {
    vehicle::SensorRecord far = origin;
    far.latitude += 1.5;
    CHECK_THROWS_AS(vehicle::to_local_enu(far, origin), OutOfProjectionError);
    far = origin;
    far.longitude += 1.5;
    CHECK_THROWS_AS(vehicle::to_local_enu(far, origin), OutOfProjectionError);
  }

  SUBCASE("rejects a polar origin") {
    vehicle::SensorRecord pole;
    pole.latitude = 90.0;
    CHECK_THROWS_AS(vehicle::from_local_enu(1.0, 1.0, pole),
                    OutOfProjectionError);
  }
}

TEST_CASE("chord measurement") {
  vehicle::SensorRecord origin;
  origin.latitude = 40.0;
  origin.longitude = -75.5;

  SUBCASE("frozen 3-4-5 displacement") {
    // 3 m north and 4 m east of the origin, heading 30 degrees: the
    // lat/lon below were derived independently from the meter offsets.
    vehicle::SensorRecord prev = origin;
    prev.timestamp = 0.0;
    prev.heading = 30.0;
    vehicle::SensorRecord curr;
    curr.timestamp = 1.0;
    curr.latitude = 40.000026979610912;
    curr.longitude = -75.499953040825670;
    curr.heading = 30.0;
    const auto m = vehicle::chord_measurement(prev, curr, origin);
    CHECK(m.delta_s == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(m.body_dx == doctest::Approx(4.9641016151377546).epsilon(1e-9));
    CHECK(m.body_dy == doctest::Approx(-0.5980762113533159).epsilon(1e-8));
    CHECK(m.delta_theta == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("chord length is rotation invariant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-50.0, 50.0);
    std::uniform_real_distribution<double> hdg(0.0, 360.0);
    for (int i = 0; i < 50; ++i) {
      const double east = dist(rng), north = dist(rng);
      const double h0 = hdg(rng), h1 = hdg(rng);
      auto prev = vehicle::from_local_enu(0.0, 0.0, origin, 0.0, h0);
      auto curr = vehicle::from_local_enu(east, north, origin, 1.0, h1);
      const auto m = vehicle::chord_measurement(prev, curr, origin);
      CHECK(m.delta_s ==
            doctest::Approx(std::hypot(east, north)).epsilon(1e-9));
      CHECK(std::hypot(m.body_dx, m.body_dy) ==
            doctest::Approx(m.delta_s).epsilon(1e-12));
    }
  }

  SUBCASE("heading difference wraps into (-pi, pi]") {
    auto prev = vehicle::from_local_enu(0.0, 0.0, origin, 0.0, 350.0);
    auto curr = vehicle::from_local_enu(1.0, 0.0, origin, 1.0, 10.0);
    const auto m = vehicle::chord_measurement(prev, curr, origin);
    CHECK(m.delta_theta == doctest::Approx(20.0 * pi / 180.0).epsilon(1e-12));
  }

  SUBCASE("records out of time order are rejected") {
    auto prev = vehicle::from_local_enu(0.0, 0.0, origin, 5.0, 0.0);
    auto curr = vehicle::from_local_enu(1.0, 0.0, origin, 4.0, 0.0);
    CHECK_THROWS_AS(vehicle::chord_measurement(prev, curr, origin),
                    std::invalid_argument);
  }
}

TEST_CASE("chord approximates the arc to second order") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> radius(5.0, 500.0);
  std::uniform_real_distribution<double> dtheta(0.01, 0.2);
  std::uniform_real_distribution<double> sign01(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double r = radius(rng);
    const double dth = (sign01(rng) < 0.5 ? -1.0 : 1.0) * dtheta(rng);
    const double arc = r * std::abs(dth);
    const double chord = 2.0 * r * std::sin(std::abs(dth) / 2.0);
    CHECK(std::abs(chord / arc - 1.0) <= dth * dth / 24.0);
  }
}

TEST_CASE("trajectory reconstruction") {
  SUBCASE("literal mode matches the half-angle recursion exactly") {
    std::vector<vehicle::IncrementalMeasurement> increments(40);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ds(0.1, 2.0);
    std::uniform_real_distribution<double> dth(-0.3, 0.3);
    for (auto& inc : increments) {
      inc.delta_s = ds(rng);
      inc.delta_theta = dth(rng);
    }
    const auto track = vehicle::reconstruct_trajectory(
        increments, {}, 0.7, vehicle::ReconstructionMode::kLiteral);
    REQUIRE(track.size() == increments.size() + 1);
    double x = 0.0, y = 0.0;
    for (size_t k = 0; k < increments.size(); ++k) {
      x += increments[k].delta_s * std::sin(increments[k].delta_theta / 2.0);
      y += increments[k].delta_s * std::cos(increments[k].delta_theta / 2.0);
      CHECK(track[k + 1].x_north == doctest::Approx(x).epsilon(1e-14));
      CHECK(track[k + 1].y_east == doctest::Approx(y).epsilon(1e-14));
    }
  }

  SUBCASE("literal mode straight line runs up the y axis") {
    std::vector<vehicle::IncrementalMeasurement> increments(10);
    for (auto& inc : increments) {
      inc.delta_s = 2.0;
      inc.delta_theta = 0.0;
    }
    const auto track = vehicle::reconstruct_trajectory(
        increments, {}, 1.2, vehicle::ReconstructionMode::kLiteral);
    CHECK(track.back().x_north == 0.0);
    CHECK(track.back().y_east == doctest::Approx(20.0));
  }

  SUBCASE("cumulative mode turns constant increments into a circle") {
    const double ds = 0.5, dth = 0.1;
    const int n = 63;  // one missing step short of a full turn
    std::vector<vehicle::IncrementalMeasurement> increments(n);
    for (auto& inc : increments) {
      inc.delta_s = ds;
      inc.delta_theta = dth;
    }
    const double theta0 = 0.35;
    const auto track = vehicle::reconstruct_trajectory(
        increments, {}, theta0, vehicle::ReconstructionMode::kCumulative);
    // Closed form: points lie on a circle of radius ds / (2 sin(dth/2)).
    const double rc = ds / (2.0 * std::sin(dth / 2.0));
    for (int k = 0; k <= n; ++k) {
      const double ex = rc * (std::cos(theta0) - std::cos(theta0 + k * dth));
      const double ey = rc * (std::sin(theta0 + k * dth) - std::sin(theta0));
      CHECK(track[k].x_north == doctest::Approx(ex).epsilon(1e-9));
      CHECK(track[k].y_east == doctest::Approx(ey).epsilon(1e-9));
    }
    // Frozen endpoint distance for theta0 = 0 and the same increments.
    const auto zero = vehicle::reconstruct_trajectory(
        increments, {}, 0.0, vehicle::ReconstructionMode::kCumulative);
    CHECK(std::hypot(zero.back().x_north, zero.back().y_east) ==
          doctest::Approx(0.084107514088685).epsilon(1e-10));
  }

  SUBCASE("cumulative straight line follows the initial heading") {
    std::vector<vehicle::IncrementalMeasurement> increments(8);
    for (auto& inc : increments) {
      inc.delta_s = 1.5;
      inc.delta_theta = 0.0;
    }
    const double heading = 0.6;
    const auto track = vehicle::reconstruct_trajectory(
        increments, {}, heading, vehicle::ReconstructionMode::kCumulative);
    CHECK(track.back().x_north ==
          doctest::Approx(12.0 * std::sin(heading)).epsilon(1e-12));
    CHECK(track.back().y_east ==
          doctest::Approx(12.0 * std::cos(heading)).epsilon(1e-12));
  }

  SUBCASE("start point and step indices carry through") {
    std::vector<vehicle::IncrementalMeasurement> increments(3);
    for (auto& inc : increments) {
      inc.delta_s = 1.0;
      inc.delta_theta = 0.0;
    }
    vehicle::TrajectoryPoint start;
    start.x_north = 5.0;
    start.y_east = -2.0;
    start.step = 10;
    const auto track = vehicle::reconstruct_trajectory(
        increments, start, 0.0, vehicle::ReconstructionMode::kCumulative);
    CHECK(track.front().x_north == 5.0);
    CHECK(track.front().step == 10);
    CHECK(track.back().step == 13);
    CHECK(track.back().y_east == doctest::Approx(1.0));
  }
}

TEST_CASE("sensor record validation") {
  vehicle::SensorRecord rec;
  rec.latitude = 40.0;
  rec.longitude = -75.5;
  rec.heading = 10.0;
  CHECK_NOTHROW(rec.validate());
  rec.latitude = 95.0;
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
  rec.latitude = 40.0;
  rec.longitude = 200.0;
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
  rec.longitude = -75.5;
  rec.heading = 400.0;
  CHECK_THROWS_AS(rec.validate(), std::invalid_argument);
}
