#include "doctest.h"

#include "abrsim/vbr.hpp"

using namespace abrsim;

namespace {
VbrParams on_off(double d, double p_ms) {
  VbrParams v;
  v.enabled = true;
  v.duty_cycle = d;
  v.period = from_millis(p_ms);
  return v;
}
}  // namespace

TEST_CASE("ON-OFF windows") {
  const VbrParams v = on_off(0.8, 10);
  CHECK_FALSE(vbr_active(from_millis(1), v));
  CHECK(vbr_active(from_millis(2), v));
  CHECK(vbr_active(from_millis(2 + 7.999), v));
  CHECK_FALSE(vbr_active(from_millis(2 + 9), v));
  CHECK(vbr_active(from_millis(2 + 10), v));

  const VbrParams w = on_off(0.95, 100);
  CHECK(vbr_active(from_millis(2 + 94), w));
  CHECK_FALSE(vbr_active(from_millis(2 + 96), w));

  VbrParams off = v;
  off.enabled = false;
  CHECK_FALSE(vbr_active(from_millis(3), off));
}

TEST_CASE("cell gap at the default amplitude") {
  const VbrParams v = on_off(0.8, 10);
  // 424 bits / 124.41 Mb/s = 3.40809 us
  CHECK(vbr_cell_gap(v) == 3408);

  VbrParams sat = v;
  sat.amplitude_mbps = 155.52;
  ScenarioConfig c;
  CHECK(vbr_cell_gap(sat) == c.cell_time());
}

TEST_CASE("next cell time") {
  const VbrParams v = on_off(0.8, 10);
  const SimTime start = v.start_time;
  CHECK(next_vbr_cell_time(0, v) == start);
  CHECK(next_vbr_cell_time(start, v) == start);
  CHECK(next_vbr_cell_time(start + 1, v) == start + 3408);
  CHECK(next_vbr_cell_time(start + 3408, v) == start + 3408);
  // OFF window jumps to the next period.
  CHECK(next_vbr_cell_time(start + from_millis(9), v) == start + from_millis(10));
  CHECK(next_vbr_cell_time(start + from_millis(10) + 1, v) == start + from_millis(10) + 3408);
}

TEST_CASE("long-run VBR rate is d times the amplitude") {
  const VbrParams v = on_off(0.7, 20);
  const SimTime end = v.start_time + from_millis(1000);
  std::uint64_t cells = 0;
  for (SimTime t = next_vbr_cell_time(0, v); t < end; t = next_vbr_cell_time(t + 1, v)) {
    CHECK(vbr_active(t, v));
    ++cells;
  }
  const double expected = 0.7 * 124.41e6 / 424.0;
  CHECK(static_cast<double>(cells) == doctest::Approx(expected).epsilon(0.001));
}
