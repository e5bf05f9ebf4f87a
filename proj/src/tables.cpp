#include "abrsim/tables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace abrsim {

ScenarioConfig source_queue_scenario(std::optional<std::uint64_t> source_buffer_cells) {
  ScenarioConfig c;
  c.n_sources = 15;
  c.link_length_km = 1000.0;
  c.abr.source_buffer_cells = source_buffer_cells;
  c.vbr.enabled = false;
  c.erica.scheme = EricaScheme::kErica;
  c.erica.target_utilization = 0.9;
  c.erica.interval_time = 5 * kNanosPerMilli;
  c.erica.interval_cells = 500;
  c.erica.na_averaging = true;
  c.erica.z_averaging = OverloadAveraging::kNone;
  c.duration = 20 * kNanosPerSecond;
  return c;
}

ScenarioConfig vbr_scenario(double duty_cycle, double period_ms, double link_length_km) {
  ScenarioConfig c;
  c.n_sources = 15;
  c.link_length_km = link_length_km;
  c.vbr.enabled = true;
  c.vbr.duty_cycle = duty_cycle;
  c.vbr.period = from_millis(period_ms);
  c.erica.scheme = EricaScheme::kEricaPlus;
  c.erica.interval_time = 1 * kNanosPerMilli;
  c.erica.interval_cells = 100;
  c.erica.na_averaging = false;
  c.erica.z_averaging = OverloadAveraging::kNone;
  c.duration = 10 * kNanosPerSecond;
  return c;
}

namespace {

TableRow row(std::string label, std::string published, ScenarioConfig config) {
  config.scenario_id = label;
  return {std::move(label), std::move(published), std::move(config)};
}

std::string format(const char* fmt, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

std::string queue_text(const RunMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu (%.2fxRTT) %s",
                static_cast<unsigned long long>(m.max_switch_queue),
                static_cast<double>(m.max_switch_queue) / kReferenceRttCells,
                std::string(to_string(m.divergence)).c_str());
  return buf;
}

RowVerdict verdict(const TableRow& r, const RunMetrics& m, std::string simulated) {
  RowVerdict v;
  v.label = r.label;
  v.published = r.published;
  v.simulated = std::move(simulated);
  v.passed = true;
  if (!m.conservation_ok) {
    v.passed = false;
    v.detail = "cell conservation violated";
  }
  return v;
}

void require(RowVerdict& v, bool ok, const std::string& what) {
  if (ok) return;
  v.passed = false;
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += what;
}

std::vector<RowVerdict> judge_table1(const std::vector<TableRow>& rows,
                                     const std::vector<RunMetrics>& ms) {
  std::vector<RowVerdict> out;
  const RunMetrics& full = ms[3];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RunMetrics& m = ms[i];
    char buf[200];
    std::snprintf(buf, sizeof buf, "src q %llu, switch q %llu (%.2fxRTT), %.2f Mbps, drops %llu",
                  static_cast<unsigned long long>(m.max_source_queue_all),
                  static_cast<unsigned long long>(m.max_switch_queue),
                  m.max_switch_queue_rtt_frac, m.goodput_mbps,
                  static_cast<unsigned long long>(m.drops_source));
    RowVerdict v = verdict(rows[i], m, buf);
    const std::uint64_t buffer = m.source_buffer_cells.value_or(UINT64_MAX);
    if (buffer >= 1000) {
      require(v, static_cast<double>(m.max_switch_queue) < 3.0 * m.rtt_cells,
              "max switch queue not under 3xRTT");
    }
    if (i < 3) {
      require(v, m.drops_source > 0, "expected source drops");
      require(v, m.goodput_mbps < full.goodput_mbps, "goodput not below the full-buffer row");
      if (i + 1 < 3) {
        require(v, m.goodput_mbps < ms[i + 1].goodput_mbps,
                "goodput not increasing with buffer size");
      }
    } else {
      const double rel = std::abs(m.goodput_mbps - kPublishedMaxGoodputMbps) /
                         kPublishedMaxGoodputMbps;
      require(v, rel <= 0.03, format("goodput off by %.2f%%", rel * 100.0));
      require(v, m.drops_source == 0 && m.drops_switch == 0, "expected zero drops");
      for (std::uint64_t q : m.max_source_queue) {
        const double frac = static_cast<double>(q) / static_cast<double>(kWindowCells);
        if (frac < 0.90 || frac > 1.00) {
          require(v, false, format("per-VC max source queue %.3fxWin outside [0.90, 1.00]", frac));
          break;
        }
      }
      require(v, m.steady_state_switch_queue < 0.05 * m.rtt_cells,
              format("steady-state switch queue %.1f cells", m.steady_state_switch_queue));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<RowVerdict> judge_divergence_rows(const std::vector<TableRow>& rows,
                                              const std::vector<RunMetrics>& ms,
                                              const std::vector<bool>& diverges) {
  std::vector<RowVerdict> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RunMetrics& m = ms[i];
    RowVerdict v = verdict(rows[i], m, queue_text(m));
    if (diverges[i]) {
      require(v, m.divergence == Divergence::kDivergent, "expected DIVERGENT");
    } else {
      require(v, m.divergence == Divergence::kConvergent, "expected CONVERGENT");
      require(v, static_cast<double>(m.max_switch_queue) < kReferenceRttCells,
              "max switch queue not under 1xRTT");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<RowVerdict> judge_table4(const std::vector<TableRow>& rows,
                                     const std::vector<RunMetrics>& ms) {
  std::vector<RowVerdict> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RunMetrics& m = ms[i];
    RowVerdict v = verdict(rows[i], m, queue_text(m));
    if (i < 2) {
      require(v, m.divergence == Divergence::kConvergent, "expected CONVERGENT");
      require(v, m.max_switch_queue >= 2500 && m.max_switch_queue <= 11040,
              "max switch queue outside [2500, 11040]");
    } else {
      require(v, m.divergence == Divergence::kDivergent, "baseline expected DIVERGENT");
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::vector<TableRow> table_rows(int table_id) {
  std::vector<TableRow> rows;
  switch (table_id) {
    case 1:
      rows.push_back(row("T1.1", "buf 100: overflow, 8624 (0.78xRTT), 73.27 Mbps",
                         source_queue_scenario(100)));
      rows.push_back(row("T1.2", "buf 1000: overflow, 17171 (1.56xRTT), 83.79 Mbps",
                         source_queue_scenario(1000)));
      rows.push_back(row("T1.3", "buf 10000: overflow, 17171 (1.56xRTT), 95.48 Mbps",
                         source_queue_scenario(10000)));
      rows.push_back(row("T1.4", "buf 100000: 23901 (0.97xWin), 17171 (1.56xRTT), 110.90 Mbps",
                         source_queue_scenario(100000)));
      break;
    case 2: {
      struct Cell2 {
        double d, p;
        const char* published;
      };
      const Cell2 cells[] = {{0.95, 100, "2588 (0.23xRTT)"}, {0.8, 100, "5217 (0.47xRTT)"},
                             {0.7, 100, "5688 (0.52xRTT)"},  {0.95, 10, "2709 (0.25xRTT)"},
                             {0.8, 10, "DIVERGENT"},         {0.7, 10, "DIVERGENT"},
                             {0.95, 1, "2589 (0.23xRTT)"},   {0.8, 1, "4077 (0.37xRTT)"},
                             {0.7, 1, "2928 (0.26xRTT)"}};
      int i = 1;
      for (const Cell2& c : cells) {
        rows.push_back(row("T2." + std::to_string(i++), c.published, vbr_scenario(c.d, c.p)));
      }
      break;
    }
    case 3:
      rows.push_back(row("T3.1", "fb 1 ms: 4176 (0.4xRTT)", vbr_scenario(0.8, 10, 100)));
      rows.push_back(row("T3.2", "fb 5 ms: DIVERGES", vbr_scenario(0.8, 10, 500)));
      rows.push_back(row("T3.3", "fb 10 ms: DIVERGES", vbr_scenario(0.8, 10, 1000)));
      break;
    case 4: {
      ScenarioConfig averaged = vbr_scenario(0.7, 20);
      averaged.erica.na_averaging = true;
      averaged.erica.z_averaging = OverloadAveraging::kScheme1;
      averaged.erica.alpha_z = 0.2;
      rows.push_back(row("T4.1", "(1,100) Na+z averaging: 5223", averaged));

      ScenarioConfig long_interval = vbr_scenario(0.7, 20);
      long_interval.erica.na_averaging = true;
      long_interval.erica.interval_time = 5 * kNanosPerMilli;
      long_interval.erica.interval_cells = 500;
      rows.push_back(row("T4.2", "(5,500) Na averaging: 5637", long_interval));

      rows.push_back(row("T4.base", "(1,100) no averaging: formerly divergent",
                         vbr_scenario(0.7, 20)));
      break;
    }
    default:
      throw std::invalid_argument("table id must be 1, 2, 3 or 4");
  }
  return rows;
}

std::vector<RowVerdict> judge_table(int table_id, const std::vector<RunMetrics>& metrics) {
  const std::vector<TableRow> rows = table_rows(table_id);
  if (metrics.size() != rows.size()) throw std::invalid_argument("metrics do not match table rows");
  switch (table_id) {
    case 1:
      return judge_table1(rows, metrics);
    case 2:
      return judge_divergence_rows(rows, metrics,
                                   {false, false, false, false, true, true, false, false, false});
    case 3:
      return judge_divergence_rows(rows, metrics, {false, true, true});
    default:
      return judge_table4(rows, metrics);
  }
}

bool TableReport::passed() const {
  return !verdicts.empty() &&
         std::all_of(verdicts.begin(), verdicts.end(), [](const RowVerdict& v) { return v.passed; });
}

TableReport reproduce_table(int table_id, unsigned jobs, std::vector<SimulationResult>* results) {
  TableReport report;
  report.table_id = table_id;
  report.rows = table_rows(table_id);
  const std::size_t n = report.rows.size();
  std::vector<RunOutput> outputs(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) outputs[i] = run_scenario(report.rows[i].config);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (auto& o : outputs) {
    report.metrics.push_back(o.metrics);
    if (results) results->push_back(std::move(o.result));
  }
  report.verdicts = judge_table(table_id, report.metrics);
  return report;
}

void write_table_report(std::ostream& out, const TableReport& report) {
  out << "Table " << report.table_id << "\n";
  for (const RowVerdict& v : report.verdicts) {
    out << (v.passed ? "  PASS " : "  FAIL ") << v.label << "\n"
        << "       published: " << v.published << "\n"
        << "       simulated: " << v.simulated << "\n";
    if (!v.detail.empty()) out << "       problem:   " << v.detail << "\n";
  }
  out << "Table " << report.table_id
      << (report.passed() ? ": all rows pass\n" : ": FAILED\n");
}

}  // namespace abrsim
