#include "doctest.h"

#include <cmath>
#include <sstream>

#include "abrsim/harness.hpp"
#include "abrsim/tables.hpp"

using namespace abrsim;

namespace {
constexpr double kRtt = 11040.0;

// One record per millisecond; `queue(k)` gives the window maximum for record k.
template <typename F>
std::vector<TraceRecord> trace_of(std::size_t n, F queue) {
  std::vector<TraceRecord> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k].t = (k + 1) * kNanosPerMilli;
    v[k].switch_queue_max = queue(k);
    v[k].switch_queue = v[k].switch_queue_max;
  }
  return v;
}
}  // namespace

TEST_CASE("linearly growing queue is divergent") {
  const auto trace = trace_of(10000, [](std::size_t k) { return static_cast<std::uint64_t>(5 * k); });
  CHECK(detect_divergence(trace, kRtt, from_millis(10)) == Divergence::kDivergent);
}

TEST_CASE("bounded sawtooth is convergent") {
  const auto trace =
      trace_of(10000, [](std::size_t k) { return static_cast<std::uint64_t>((k % 10) * 500); });
  CHECK(detect_divergence(trace, kRtt, from_millis(10)) == Divergence::kConvergent);
}

TEST_CASE("growth that stays small is convergent") {
  // Rises steadily but never exceeds 3 x RTT.
  const auto trace = trace_of(10000, [](std::size_t k) { return static_cast<std::uint64_t>(k * 3); });
  CHECK(detect_divergence(trace, kRtt, from_millis(10)) == Divergence::kConvergent);
}

TEST_CASE("a large but flat queue is convergent") {
  const auto trace = trace_of(10000, [](std::size_t) { return std::uint64_t{50000}; });
  CHECK(detect_divergence(trace, kRtt, from_millis(10)) == Divergence::kConvergent);
}

TEST_CASE("too few periods is unknown") {
  const auto trace = trace_of(190, [](std::size_t k) { return static_cast<std::uint64_t>(k * 1000); });
  CHECK(detect_divergence(trace, kRtt, from_millis(10)) == Divergence::kUnknown);
  CHECK(detect_divergence({}, kRtt, from_millis(10)) == Divergence::kUnknown);
}

TEST_CASE("classification buckets") {
  ScenarioConfig c;
  CHECK(divergence_bucket(c) == c.duration / 20);
  c.vbr.enabled = true;
  c.vbr.period = from_millis(20);
  CHECK(divergence_bucket(c) == from_millis(20));
}

TEST_CASE("metrics CSV layout") {
  std::ostringstream out;
  write_metrics_header(out);
  CHECK(out.str() ==
        "scenario_id,n_sources,source_buffer_cells,vbr_d,vbr_p_ms,feedback_delay_ms,scheme,"
        "max_source_queue_cells,max_switch_queue_cells,max_switch_queue_rtt_frac,goodput_mbps,"
        "drops_source,drops_switch,divergence\n");

  RunMetrics m;
  m.scenario_id = "T2.1";
  m.n_sources = 15;
  m.vbr_d = 0.95;
  m.vbr_p_ms = 100;
  m.feedback_delay_ms = 10;
  m.scheme = EricaScheme::kEricaPlus;
  m.max_source_queue_all = 24000;
  m.max_switch_queue = 2588;
  m.max_switch_queue_rtt_frac = 2588 / kRtt;
  m.goodput_mbps = 110.9;
  m.divergence = Divergence::kConvergent;
  std::ostringstream row;
  write_metrics_row(row, m);
  CHECK(row.str() == "T2.1,15,inf,0.950,100.000,10.000,ERICA+,24000,2588,0.2344,110.9000,0,0,CONVERGENT\n");

  m.source_buffer_cells = 1000;
  m.scheme = EricaScheme::kErica;
  row.str("");
  write_metrics_row(row, m);
  CHECK(row.str().find(",1000,") != std::string::npos);
  CHECK(row.str().find(",ERICA,") != std::string::npos);
}

TEST_CASE("trace CSV with and without per-VC columns") {
  std::vector<TraceRecord> trace(1);
  trace[0].t = 2 * kNanosPerMilli;
  trace[0].switch_queue_max = 17;
  trace[0].vbr_on = true;
  trace[0].acr = {100.25, 7.0};
  trace[0].source_queue = {3, 0};

  std::ostringstream brief;
  write_trace_csv(brief, trace, 2, false);
  CHECK(brief.str() == "t_us,switch_queue_cells,vbr_on\n2000,17,1\n");

  std::ostringstream full;
  write_trace_csv(full, trace, 2, true);
  CHECK(full.str() ==
        "t_us,switch_queue_cells,vbr_on,vc0_acr_cps,vc0_srcq_cells,vc1_acr_cps,vc1_srcq_cells\n"
        "2000,17,1,100.2,3,7.0,0\n");
}

TEST_CASE("a trace interval longer than the run gives a header-only trace") {
  ScenarioConfig c;
  c.n_sources = 2;
  c.duration = from_millis(20);
  c.trace_interval = from_millis(50);
  const RunOutput out = run_scenario(c);
  CHECK(out.result.trace.empty());
  std::ostringstream csv;
  write_trace_csv(csv, out.result.trace, c.n_sources, c.trace_per_vc);
  CHECK(csv.str() == "t_us,switch_queue_cells,vbr_on\n");
  CHECK(out.metrics.divergence == Divergence::kUnknown);
}

TEST_CASE("identical configs give byte-identical CSVs") {
  ScenarioConfig c;
  c.n_sources = 5;
  c.duration = from_millis(400);
  c.vbr.enabled = true;
  c.trace_per_vc = true;
  std::ostringstream a, b;
  for (std::ostringstream* s : {&a, &b}) {
    const RunOutput out = run_scenario(c);
    write_metrics_row(*s, out.metrics);
    write_trace_csv(*s, out.result.trace, c.n_sources, true);
  }
  CHECK(a.str() == b.str());
}

TEST_CASE("metrics of a short run") {
  ScenarioConfig c;
  c.n_sources = 4;
  c.duration = from_millis(600);
  const RunOutput out = run_scenario(c);
  const RunMetrics& m = out.metrics;
  CHECK(m.max_source_queue.size() == 4);
  CHECK(m.rtt_cells == doctest::Approx(kRtt));
  CHECK(m.feedback_delay_ms == doctest::Approx(10.0));
  CHECK(m.vbr_d == 0.0);
  CHECK(m.goodput_mbps > 0.0);
  CHECK(m.goodput_mbps <= max_throughput_bound(c));
  CHECK(m.conservation_ok);
  CHECK(m.max_switch_queue_rtt_frac == doctest::Approx(m.max_switch_queue / kRtt));
}

TEST_CASE("emit functions report the failing path") {
  const std::vector<RunMetrics> rows(1);
  try {
    emit_metrics_csv("/nonexistent-dir/metrics.csv", rows);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/metrics.csv") != std::string::npos);
  }
}

TEST_CASE("table row sets") {
  const auto t1 = table_rows(1);
  REQUIRE(t1.size() == 4);
  CHECK(t1[0].config.abr.source_buffer_cells == 100u);
  CHECK(t1[3].config.abr.source_buffer_cells == 100000u);
  CHECK(t1[3].config.erica.scheme == EricaScheme::kErica);
  CHECK(t1[3].config.duration >= 20 * kNanosPerSecond);

  const auto t2 = table_rows(2);
  REQUIRE(t2.size() == 9);
  CHECK(t2[4].config.vbr.duty_cycle == doctest::Approx(0.8));
  CHECK(t2[4].config.vbr.period == from_millis(10));
  CHECK(t2[8].config.vbr.period == from_millis(1));

  const auto t3 = table_rows(3);
  REQUIRE(t3.size() == 3);
  CHECK(feedback_delay(t3[0].config) == from_millis(1));
  CHECK(feedback_delay(t3[1].config) == from_millis(5));
  CHECK(feedback_delay(t3[2].config) == from_millis(10));

  const auto t4 = table_rows(4);
  REQUIRE(t4.size() == 3);
  CHECK(t4[0].config.erica.z_averaging == OverloadAveraging::kScheme1);
  CHECK(t4[0].config.erica.na_averaging);
  CHECK(t4[1].config.erica.interval_cells == 500);
  CHECK(t4[2].config.erica.z_averaging == OverloadAveraging::kNone);
  CHECK_FALSE(t4[2].config.erica.na_averaging);
  for (const auto& r : t4) CHECK(r.config.vbr.period == from_millis(20));

  CHECK_THROWS(table_rows(5));
}

TEST_CASE("table judging flags a conservation failure") {
  std::vector<RunMetrics> ms(3);
  for (auto& m : ms) {
    m.divergence = Divergence::kDivergent;
    m.max_switch_queue = 100000;
  }
  ms[0].divergence = Divergence::kConvergent;
  ms[0].max_switch_queue = 2000;
  auto v = judge_table(3, ms);
  CHECK(v[0].passed);
  CHECK(v[1].passed);
  ms[1].conservation_ok = false;
  v = judge_table(3, ms);
  CHECK_FALSE(v[1].passed);
  ms[0].max_switch_queue = 12000;
  CHECK_FALSE(judge_table(3, ms)[0].passed);
}
