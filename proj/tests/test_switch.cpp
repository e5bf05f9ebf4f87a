#include "doctest.h"

#include <vector>

#include "abrsim/switch_port.hpp"

using namespace abrsim;

namespace {
constexpr double kLink = 155.52e6 / 424.0;
constexpr SimTime kCellTime = 2726;

struct Rig {
  EventQueue events;
  std::vector<std::pair<std::uint32_t, SimTime>> departures;
  SwitchPort port;

  explicit Rig(EricaParams p = EricaParams{}, std::uint32_t n_vcs = 4,
               std::optional<std::uint64_t> capacity = std::nullopt)
      : port(events, p, kLink, kCellTime, n_vcs, capacity,
             [this](const Cell& c, SimTime t) { departures.emplace_back(c.vc, t); }) {
    port.start();
  }
};

Cell abr(std::uint32_t vc) {
  Cell c;
  c.vc = vc;
  return c;
}

Cell vbr() {
  Cell c;
  c.kind = CellKind::kVbr;
  return c;
}
}  // namespace

TEST_CASE("an ABR cell on an idle port leaves after one cell time") {
  Rig r;
  r.events.schedule(1000, [&] { r.port.on_cell(abr(2)); });
  r.events.run_until(10000);
  REQUIRE(r.departures.size() == 1);
  CHECK(r.departures[0] == std::pair<std::uint32_t, SimTime>{2, 1000 + kCellTime});
}

TEST_CASE("VBR has strict priority over waiting ABR cells") {
  Rig r;
  r.events.schedule(0, [&] {
    r.port.on_cell(abr(0));  // goes straight into service
    r.port.on_cell(abr(1));
    r.port.on_cell(vbr());
  });
  r.events.run_until(kCellTime);
  CHECK(r.port.abr_queue_length() == 1);
  CHECK(r.port.vbr_pending() == 0);
  r.events.run_until(10 * kCellTime);
  REQUIRE(r.departures.size() == 2);
  CHECK(r.departures[0].second == kCellTime);
  CHECK(r.departures[1].second == 3 * kCellTime);
  CHECK(r.port.vbr_departures() == 1);
}

TEST_CASE("VBR at 80% of the link leaves ABR the residual slots") {
  Rig r;
  const SimTime gap = 3408;
  const SimTime horizon = 100 * kNanosPerMilli;
  r.events.schedule(0, [&] {
    for (int i = 0; i < 100000; ++i) r.port.on_cell(abr(i % 4));
  });
  for (SimTime t = 0; t < horizon; t += gap) r.events.schedule(t, [&] { r.port.on_cell(vbr()); });
  r.events.run_until(horizon);
  const double abr_rate = static_cast<double>(r.departures.size()) / to_seconds(horizon);
  CHECK(abr_rate / kLink == doctest::Approx(1.0 - 124.41 / 155.52).epsilon(0.01));
  CHECK(r.port.link_idle_with_backlog() == 0);
}

TEST_CASE("a one-RTT backlog drains in about 30 ms") {
  Rig r;
  r.events.schedule(0, [&] {
    for (int i = 0; i < 11040; ++i) r.port.on_cell(abr(i % 4));
  });
  r.events.run_until(kNanosPerSecond);
  REQUIRE(r.departures.size() == 11040);
  CHECK(to_millis(r.departures.back().second) == doctest::Approx(30.0).epsilon(0.01));
  CHECK(r.port.max_queue_seen() == 11039);
  CHECK(r.port.link_idle_with_backlog() == 0);
  CHECK(r.port.abr_arrivals() == r.port.abr_departures());
}

TEST_CASE("BRM stamping takes the minimum") {
  EricaParams p;
  p.scheme = EricaScheme::kErica;
  p.target_utilization = 0.4;
  Rig r(p, 1);
  Cell brm;
  brm.kind = CellKind::kBackwardRm;
  brm.rm.er = kLink;
  r.port.stamp_brm(brm);
  CHECK(brm.rm.er == doctest::Approx(0.4 * kLink));

  brm.rm.er = 0.1 * kLink;
  r.port.stamp_brm(brm);
  CHECK(brm.rm.er == doctest::Approx(0.1 * kLink));

  CHECK_THROWS_AS(r.port.on_cell(brm), std::logic_error);
}

TEST_CASE("intervals close on cell count or on the timer") {
  Rig r;
  r.events.schedule(100, [&] {
    for (int i = 0; i < 100; ++i) r.port.on_cell(abr(0));
  });
  r.events.run_until(200);
  CHECK(r.port.erica().intervals_completed() == 1);
  CHECK(r.port.erica().interval_start() == 100);

  r.events.schedule(300, [&] {
    for (int i = 0; i < 40; ++i) r.port.on_cell(abr(1));
  });
  r.events.run_until(100 + kNanosPerMilli);
  CHECK(r.port.erica().intervals_completed() == 2);
  CHECK(r.port.erica().metrics().abr_cells == 40);
  CHECK(r.port.erica().metrics().duration == kNanosPerMilli);
}

TEST_CASE("finite switch buffer drops and counts") {
  Rig r(EricaParams{}, 1, 10);
  r.events.schedule(0, [&] {
    for (int i = 0; i < 15; ++i) r.port.on_cell(abr(0));
  });
  r.events.run_until(kNanosPerMilli);
  CHECK(r.port.abr_drops() == 4);  // one in service, ten queued
  CHECK(r.departures.size() == 11);
}

TEST_CASE("window maximum resets to the current queue") {
  Rig r;
  r.events.schedule(0, [&] {
    for (int i = 0; i < 10; ++i) r.port.on_cell(abr(0));
  });
  r.events.run_until(5 * kCellTime);
  CHECK(r.port.take_window_max() == 9);
  CHECK(r.port.take_window_max() == 4);
}
