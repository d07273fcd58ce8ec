#include "doctest.h"
#include "oracles.hpp"
#include "sdrd/geometry.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace sdrd;

TEST_CASE("cutoff and weight match the pinned formula") {
  const double eps = 0.9;
  auto w = build_weight_profile(eps, 1.0);
  CHECK(w.chi(0.1) == 1.0);
  CHECK(w.chi(0.3) == 1.0);
  CHECK(w.chi(0.6) == 0.0);
  CHECK(w.chi(0.85) == 0.0);
  CHECK(w.r(0.2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(w.r(0.8) == doctest::Approx(1.0).epsilon(1e-15));
  double prev = 1.0;
  for (int i = 1; i < 60; ++i) {
    const double y = 0.3 + 0.3 * i / 60.0;
    const double c = w.chi(y);
    CHECK(c == doctest::Approx(oracle::chi(y, eps)).epsilon(1e-13));
    CHECK(c <= prev + 1e-15);  // monotone across the transition
    prev = c;
    CHECK(w.r(y) > 0.0);
    CHECK(w.r(y) <= 1.0);
  }
}

TEST_CASE("tau integrates r^-s: transition-zone value against Romberg") {
  const double eps = 0.9;
  for (double s : {1.0, 1.5, 2.0}) {
    auto w = build_weight_profile(eps, s);
    // tau(0.3) = integral over [0.3, 0.9]; the exact zone only touches at y = eps/3
    const double expected = oracle::quad(
        [&](double y) { return std::pow(oracle::r_weight(y, eps), -s); }, 0.3, eps, 1e-13);
    CHECK(w.tau_of_y(0.3) == doctest::Approx(expected).epsilon(1e-11));
    // interior point of the transition zone too
    const double expected_mid = oracle::quad(
        [&](double y) { return std::pow(oracle::r_weight(y, eps), -s); }, 0.45, eps, 1e-13);
    CHECK(w.tau_of_y(0.45) == doctest::Approx(expected_mid).epsilon(1e-11));
  }
}

TEST_CASE("closed form in the exact zone for s = 1") {
  const double eps = 0.9;
  auto w = build_weight_profile(eps, 1.0);
  const double z = eps / 3.0;
  for (double y : {0.3, 0.1, 0.03, 1e-3, 1e-6}) {
    CHECK(w.tau_of_y(y) - w.tau_of_y(z) ==
          doctest::Approx(std::log(z / y)).epsilon(1e-12));
  }
}

TEST_CASE("y_of_tau inverts tau_of_y to relative 1e-10") {
  for (double s : {1.0, 1.5, 2.0, 3.0}) {
    for (double eps : {0.3, 0.9, 1.0}) {
      auto w = build_weight_profile(eps, s);
      for (int i = 1; i <= 40; ++i) {
        const double y = eps * i / 40.0;
        const double back = w.y_of_tau(w.tau_of_y(y));
        CHECK(back == doctest::Approx(y).epsilon(1e-10));
      }
      // and the other way around, deep into the cylinder
      for (double tau : {0.1, 1.0, 3.0, 6.0}) {
        const double y = w.y_of_tau(tau);
        CHECK(w.tau_of_y(y) == doctest::Approx(tau).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("dtau/dy equals -r^-s at mesh-level accuracy") {
  const double eps = 0.6;
  for (double s : {1.0, 2.0}) {
    auto w = build_weight_profile(eps, s);
    for (double y : {0.05, 0.15, 0.25, 0.35, 0.45, 0.55}) {
      const double h = 1e-6 * eps;
      const double d = (w.tau_of_y(y + h) - w.tau_of_y(y - h)) / (2.0 * h);
      CHECK(d == doctest::Approx(-std::pow(w.r(y), -s)).epsilon(1e-6));
    }
  }
}

TEST_CASE("weight stays smooth: second divided differences of r stabilize") {
  const double eps = 0.9;
  auto w = build_weight_profile(eps, 1.0);
  auto max_d2 = [&](int n) {
    double m = 0.0;
    const double h = eps / n;
    for (int i = 1; i + 1 < n; ++i) {
      const double y = i * h;
      const double d2 = (w.r(y - h) - 2.0 * w.r(y) + w.r(y + h)) / (h * h);
      m = std::max(m, std::abs(d2));
    }
    return m;
  };
  const double m256 = max_d2(256), m512 = max_d2(512), m1024 = max_d2(1024);
  CHECK(std::abs(m512 - m256) < 0.05 * m256);
  CHECK(std::abs(m1024 - m512) < 0.02 * m512);
}

TEST_CASE("collar chart localizes points") {
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto c = collar_chart(iv, 0.2);
  REQUIRE(c.has_value());
  CHECK(c->y == doctest::Approx(0.2));
  CHECK(c->component == 0);
  CHECK(!collar_chart(iv, 1.0).has_value());
  auto cr = collar_chart(iv, 1.7);
  REQUIRE(cr.has_value());
  CHECK(cr->y == doctest::Approx(0.3));
  CHECK(cr->component == 1);
  CHECK_THROWS_AS((void)collar_chart(iv, 2.5), std::invalid_argument);

  DomainSpec disk{DomainKind::Disk, 1.0, 0.3};
  auto cd = collar_chart(disk, 0.8, 0.0);
  REQUIRE(cd.has_value());
  CHECK(cd->y == doctest::Approx(0.2));
  CHECK(cd->theta == doctest::Approx(0.0));
  CHECK(!collar_chart(disk, 0.1, 0.2).has_value());
  auto cq = collar_chart(disk, 0.0, -0.9);
  REQUIRE(cq.has_value());
  CHECK(cq->theta == doctest::Approx(1.5 * 3.14159265358979323846));
}

TEST_CASE("interval mesh: collar volumes are dtau and cover tau_max") {
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto w = build_weight_profile(0.5, 1.0);
  auto m = build_mesh(iv, w, 4, 4, 2.0);
  CHECK(m.n_cells() == 12);
  double collar_sum = 0.0;
  int collar_count = 0;
  for (const Cell& c : m.cells) {
    CHECK(c.volume > 0.0);
    if (c.region == Region::Collar) {
      CHECK(c.volume == doctest::Approx(0.5).epsilon(1e-14));
      collar_sum += c.volume;
      ++collar_count;
    }
  }
  CHECK(collar_count == 8);
  // total collar volume = tau_max * |Gamma|
  CHECK(collar_sum == doctest::Approx(m.tau_max * m.boundary_measure_total()).epsilon(1e-12));
  // deepest collar centre stays strictly inside the domain; check against a
  // bisection inversion of an independently integrated tau
  const double tau_deep = m.tau_max - 0.5 * m.dtau;
  auto tau_ref = [&](double y) {
    return oracle::quad(
        [&](double t) { return 1.0 / oracle::r_weight(t, 0.5); }, y, 0.5, 1e-13);
  };
  const double y_ref = oracle::bisect(tau_ref, 1e-8, 0.5, tau_deep, 1e-12);
  const Cell& deep = m.cells[m.collar_cell(0, m.n_collar - 1, 0)];
  CHECK(deep.y > 0.0);
  CHECK(deep.y == doctest::Approx(y_ref).epsilon(1e-7));
}

TEST_CASE("disk mesh: collar volumes carry the boundary arc element") {
  DomainSpec disk{DomainKind::Disk, 1.0, 0.3};
  auto w = build_weight_profile(0.3, 1.0);
  auto m = build_mesh(disk, w, 2, 3, 1.0, 8);
  const double arc = 2.0 * 3.14159265358979323846 * 1.0 / 8.0;
  for (const Cell& c : m.cells)
    if (c.region == Region::Collar)
      CHECK(c.volume == doctest::Approx(0.5 * arc).epsilon(1e-13));
  double collar_sum = 0.0;
  for (const Cell& c : m.cells)
    if (c.region == Region::Collar) collar_sum += c.volume;
  CHECK(collar_sum ==
        doctest::Approx(m.tau_max * m.boundary_measure_total()).epsilon(1e-12));
  // interior volumes sum to the area of the inner disk
  double int_sum = 0.0;
  for (const Cell& c : m.cells)
    if (c.region == Region::Interior) int_sum += c.volume;
  CHECK(int_sum == doctest::Approx(3.14159265358979323846 * 0.7 * 0.7).epsilon(1e-12));
}

TEST_CASE("mesh connectivity: faces consistent, seam one-to-one") {
  DomainSpec disk{DomainKind::Disk, 1.0, 0.3};
  auto w = build_weight_profile(0.3, 1.5);
  auto m = build_mesh(disk, w, 6, 5, 2.0, 8);
  std::set<std::pair<int, int>> seen;
  int seams = 0;
  std::set<int> seam_qs;
  for (const Face& f : m.faces) {
    REQUIRE(f.a >= 0);
    REQUIRE(f.b >= 0);
    REQUIRE(f.a < m.n_cells());
    REQUIRE(f.b < m.n_cells());
    CHECK(f.a != f.b);
    CHECK(f.area > 0.0);
    CHECK(f.dist > 0.0);
    CHECK(f.half_a + f.half_b == doctest::Approx(f.dist).epsilon(1e-14));
    auto key = std::minmax(f.a, f.b);
    CHECK(seen.insert(key).second);  // each internal face appears once
    if (f.kind == FaceKind::Seam) {
      ++seams;
      CHECK(m.cells[f.a].region == Region::Interior);
      CHECK(m.cells[f.b].region == Region::Collar);
      CHECK(m.cells[f.b].layer == 0);
      seam_qs.insert(m.cells[f.b].q);
    }
  }
  CHECK(seams == 8);
  CHECK(static_cast<int>(seam_qs.size()) == 8);  // exactly one seam face per q
}

TEST_CASE("mesh quality guard rejects mismatched seam widths") {
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto w = build_weight_profile(0.5, 1.0);
  CHECK_THROWS_AS(build_mesh(iv, w, 4, 400, 2.0), std::runtime_error);
  CHECK_NOTHROW(build_mesh(iv, w, 4, 4, 2.0));
}

TEST_CASE("unit weight reduces the collar to a plain y-grid") {
  auto w = make_unit_weight(0.5);
  CHECK(w.r(0.1) == 1.0);
  CHECK(w.r(0.45) == 1.0);
  CHECK(w.tau_of_y(0.2) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(w.y_of_tau(0.5) == doctest::Approx(0.0));
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto m = build_mesh(iv, w, 4, 8, 0.5);
  for (const Cell& c : m.cells)
    CHECK(c.volume == doctest::Approx(0.125).epsilon(1e-14));
  CHECK_THROWS_AS(build_mesh(iv, w, 4, 8, 0.6), std::invalid_argument);
}

TEST_CASE("domain and parameter validation") {
  CHECK_THROWS_AS(validate_domain(DomainSpec{DomainKind::Interval, 2.0, 1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_domain(DomainSpec{DomainKind::Interval, 1.0, 0.5}),
                  std::invalid_argument);  // needs nonempty interior
  CHECK_THROWS_AS(validate_domain(DomainSpec{DomainKind::Disk, -1.0, 0.3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_weight_profile(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_weight_profile(0.0, 1.0), std::invalid_argument);
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto w = build_weight_profile(0.5, 1.0);
  CHECK_THROWS_AS(build_mesh(iv, w, 4, 4, 2.0, 3), std::invalid_argument);
  DomainSpec disk{DomainKind::Disk, 1.0, 0.3};
  auto wd = build_weight_profile(0.3, 1.0);
  CHECK_THROWS_AS(build_mesh(disk, wd, 4, 4, 2.0, 2), std::invalid_argument);
  auto w_bad = build_weight_profile(0.4, 1.0);
  CHECK_THROWS_AS(build_mesh(iv, w_bad, 4, 4, 2.0), std::invalid_argument);
}

TEST_CASE("mesh and weight serialize to json") {
  DomainSpec iv{DomainKind::Interval, 2.0, 0.5};
  auto w = build_weight_profile(0.5, 1.0);
  auto m = build_mesh(iv, w, 4, 4, 2.0);
  const std::string mj = mesh_to_json(m);
  CHECK(mj.find("\"cells\"") != std::string::npos);
  CHECK(mj.find("\"region\"") != std::string::npos);
  const std::string wj = weight_profile_to_json(w);
  CHECK(wj.find("\"samples\"") != std::string::npos);
}
