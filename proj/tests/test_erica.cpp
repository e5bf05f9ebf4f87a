#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "abrsim/erica.hpp"

using namespace abrsim;

namespace {
constexpr double kLink = 155.52e6 / 424.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

EricaParams erica(double u) {
  EricaParams p;
  p.scheme = EricaScheme::kErica;
  p.target_utilization = u;
  p.interval_cells = 1'000'000;
  return p;
}
}  // namespace

TEST_CASE("queue control factor shape") {
  const EricaParams p;
  const double q0 = 500e-6 * kLink;
  CHECK(q0 == doctest::Approx(183.396).epsilon(1e-5));
  CHECK(queue_control_factor(0, p, kLink) == doctest::Approx(1.05));
  CHECK(queue_control_factor(q0, p, kLink) == doctest::Approx(1.0));
  // One point on each branch, evaluated by hand.
  CHECK(queue_control_factor(q0 / 2, p, kLink) == doctest::Approx(1.05 / 1.025));
  CHECK(queue_control_factor(2 * q0, p, kLink) == doctest::Approx(1.15 / 1.3));
  CHECK(queue_control_factor(1e9, p, kLink) == doctest::Approx(0.5));

  double prev = queue_control_factor(0, p, kLink);
  for (int i = 1; i <= 10000; ++i) {
    const double f = queue_control_factor(i * q0 / 1000.0, p, kLink);
    REQUIRE(f <= prev + 1e-12);
    REQUIRE(f >= p.qdlf);
    prev = f;
  }
}

TEST_CASE("scheme 1 overload averaging") {
  OverloadAverage1 s{1.0, true, true};
  s = average_overload_scheme1(s, 2.0, 0.2);
  CHECK(s.z_avg == doctest::Approx(1.2));

  s = average_overload_scheme1(s, 0.0, 0.2);
  CHECK_FALSE(s.seeded);
  CHECK(s.defined);
  CHECK(s.z_avg == doctest::Approx(1.2));
  s = average_overload_scheme1(s, 1.5, 0.2);
  CHECK(s.z_avg == doctest::Approx(1.5));

  s = average_overload_scheme1(s, kInf, 0.2);
  CHECK_FALSE(s.seeded);
  s = average_overload_scheme1(s, 0.5, 0.2);
  CHECK(s.z_avg == doctest::Approx(0.5));
}

TEST_CASE("scheme 2 overload averaging") {
  OverloadAverage2 s;
  s = average_overload_scheme2(s, 100.0, 100.0, 0.2);
  CHECK(s.z() == doctest::Approx(1.0));
  s = average_overload_scheme2(s, 0.0, 100.0, 0.2);
  CHECK(s.avg_input == doctest::Approx(80.0));
  CHECK(s.z() == doctest::Approx(0.8));

  OverloadAverage2 r{120.0, 100.0, true};
  CHECK(r.z() == doctest::Approx(1.2));
  CHECK(std::isinf(OverloadAverage2{}.z()));

  OverloadAverage2 fresh;
  fresh = average_overload_scheme2(fresh, 50.0, 0.0, 0.2);
  fresh = average_overload_scheme2(fresh, 0.0, 40.0, 0.2);
  CHECK(std::isfinite(fresh.z()));
  CHECK(fresh.z() > 0.0);
}

TEST_CASE("scheme 2 equals the ratio of two scalar recurrences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> in(0.0, 4e5), cap(1e4, 4e5);
  const double alpha = 0.2;
  OverloadAverage2 s;
  double a_in = 0, a_cap = 0;
  for (int k = 0; k < 5000; ++k) {
    const double x = (k % 17 == 3) ? 0.0 : in(rng);
    const double c = cap(rng);
    s = average_overload_scheme2(s, x, c, alpha);
    if (k == 0) {
      a_in = x;
      a_cap = c;
    } else {
      a_in = alpha * x + (1 - alpha) * a_in;
      a_cap = alpha * c + (1 - alpha) * a_cap;
    }
    REQUIRE(s.z() == doctest::Approx(a_in / a_cap).epsilon(1e-12));
  }
}

TEST_CASE("activity decay") {
  CHECK(update_activity(1.0, false, 0.9) == doctest::Approx(0.9));
  CHECK(update_activity(0.81, true, 0.9) == 1.0);

  EricaParams p = erica(0.9);
  p.na_averaging = true;
  EricaPort port(p, kLink, 2);
  port.on_abr_cell(0, false, 0);
  port.on_abr_cell(1, false, 0);
  port.end_interval(kNanosPerMilli, 0);
  CHECK(port.metrics().n_a == doctest::Approx(2.0));
  for (int k = 1; k <= 40; ++k) {
    port.on_abr_cell(0, false, 0);
    port.end_interval((k + 1) * kNanosPerMilli, 0);
    REQUIRE(port.activity(1) == doctest::Approx(std::pow(0.9, k)).epsilon(1e-12));
    REQUIRE(port.metrics().n_a == doctest::Approx(1.0 + std::pow(0.9, k)));
  }
}

TEST_CASE("n_a never falls below one") {
  EricaParams p = erica(0.9);
  p.na_averaging = true;
  EricaPort port(p, kLink, 3);
  port.on_abr_cell(2, false, 0);
  port.end_interval(kNanosPerMilli, 0);
  for (int k = 0; k < 12; ++k) port.end_interval((k + 2) * kNanosPerMilli, 0);
  CHECK(port.activity(2) == doctest::Approx(std::pow(0.9, 12)));
  CHECK(port.activity(2) < 0.3);
  CHECK(port.metrics().n_a == 1.0);
}

TEST_CASE("interval ends on the cell count") {
  EricaParams p = erica(0.9);
  p.interval_cells = 100;
  EricaPort port(p, kLink, 1);
  for (int i = 0; i < 99; ++i) CHECK_FALSE(port.on_abr_cell(0, false, 0));
  CHECK(port.on_abr_cell(0, false, 0));
  port.end_interval(200 * kNanosPerMicro, 0);
  CHECK(port.metrics().abr_cells == 100);
  CHECK(port.metrics().abr_input_rate == doctest::Approx(100 / 200e-6));
  CHECK(port.pending_abr_cells() == 0);
  CHECK(port.interval_start() == 200 * kNanosPerMicro);
  // A zero-length interval is ignored.
  port.end_interval(200 * kNanosPerMicro, 0);
  CHECK(port.intervals_completed() == 1);
}

TEST_CASE("target capacity and overload") {
  EricaPort port(erica(0.9), kLink, 1);
  port.end_interval(kNanosPerMilli, 0);
  CHECK(port.metrics().target_capacity == doctest::Approx(0.9 * kLink));
  CHECK(port.metrics().z_inst == 0.0);

  // Input equal to the target gives z = 1: 0.9 * link over 10 ms.
  EricaPort balanced(erica(1.0), 100000.0, 1);
  for (int i = 0; i < 1000; ++i) balanced.on_abr_cell(0, false, 0);
  balanced.end_interval(10 * kNanosPerMilli, 0);
  CHECK(balanced.metrics().z_inst == doctest::Approx(1.0));

  // VBR cells use up capacity; saturating VBR leaves no ABR target at all.
  EricaPort loaded(erica(1.0), 100000.0, 1);
  for (int i = 0; i < 1000; ++i) loaded.on_vbr_cell();
  loaded.on_abr_cell(0, false, 0);
  loaded.end_interval(10 * kNanosPerMilli, 0);
  CHECK(loaded.metrics().vbr_rate == doctest::Approx(100000.0));
  CHECK(loaded.metrics().target_capacity == 0.0);
  CHECK(std::isinf(loaded.metrics().z_inst));
  CHECK(loaded.compute_er(0) == 0.0);
}

TEST_CASE("ERICA+ scales the capacity by the queue factor") {
  EricaParams p;
  p.interval_cells = 1'000'000;
  EricaPort port(p, kLink, 1);
  port.end_interval(kNanosPerMilli, 0);
  CHECK(port.metrics().capacity_factor == doctest::Approx(1.05));
  port.end_interval(2 * kNanosPerMilli, 100000);
  CHECK(port.metrics().capacity_factor == doctest::Approx(0.5));
  CHECK(port.metrics().target_capacity == doctest::Approx(0.5 * kLink));
}

TEST_CASE("explicit rate") {
  // target 100 cells/s, ten active VCs, z = 2.
  EricaPort port(erica(1.0), 100.0, 10);
  for (std::uint32_t vc = 0; vc < 10; ++vc) {
    for (int i = 0; i < 20; ++i) port.on_abr_cell(vc, false, 0);
  }
  port.on_abr_cell(0, true, 30.0);
  port.on_abr_cell(1, true, 10.0);
  port.on_abr_cell(2, true, 500.0);
  // 203 cells over 1.015 s keeps z at exactly 2.
  port.end_interval(from_seconds(1.015), 0);
  CHECK(port.metrics().target_capacity == doctest::Approx(100.0));
  CHECK(port.metrics().z_eff == doctest::Approx(2.0));
  CHECK(port.metrics().n_a == doctest::Approx(10.0));
  CHECK(port.compute_er(0) == doctest::Approx(15.0));
  CHECK(port.compute_er(1) == doctest::Approx(10.0));
  CHECK(port.compute_er(2) == doctest::Approx(100.0));
  CHECK(port.compute_er(3) == doctest::Approx(10.0));  // no CCR recorded yet
}

TEST_CASE("explicit rate at the fixed point") {
  EricaPort port(erica(1.0), 100.0, 4);
  for (std::uint32_t vc = 0; vc < 4; ++vc) {
    for (int i = 0; i < 24; ++i) port.on_abr_cell(vc, false, 0);
    port.on_abr_cell(vc, true, 25.0);
  }
  port.end_interval(kNanosPerSecond, 0);
  CHECK(port.metrics().z_inst == doctest::Approx(1.0));
  for (std::uint32_t vc = 0; vc < 4; ++vc) CHECK(port.compute_er(vc) == doctest::Approx(25.0));
}

TEST_CASE("before the first interval every VC gets an equal share") {
  EricaPort port(erica(0.9), kLink, 15);
  CHECK(port.compute_er(3) == doctest::Approx(0.9 * kLink / 15));
}

TEST_CASE("scheme 1 holds the last average through outliers") {
  EricaParams p = erica(1.0);
  p.z_averaging = OverloadAveraging::kScheme1;
  p.alpha_z = 0.2;
  EricaPort port(p, 1000.0, 1);
  for (int i = 0; i < 2000; ++i) port.on_abr_cell(0, false, 0);
  port.end_interval(kNanosPerSecond, 0);
  CHECK(port.metrics().z_eff == doctest::Approx(2.0));
  port.end_interval(2 * kNanosPerSecond, 0);  // no input: z = 0
  CHECK(port.metrics().z_inst == 0.0);
  CHECK(port.metrics().z_eff == doctest::Approx(2.0));
  for (int i = 0; i < 1000; ++i) port.on_abr_cell(0, false, 0);
  port.end_interval(3 * kNanosPerSecond, 0);
  CHECK(port.metrics().z_eff == doctest::Approx(1.0));
}
