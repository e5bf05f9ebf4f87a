#include "abrsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace abrsim {

std::string_view to_string(EricaScheme scheme) {
  return scheme == EricaScheme::kEricaPlus ? "ERICA+" : "ERICA";
}

std::string_view to_string(OverloadAveraging mode) {
  switch (mode) {
    case OverloadAveraging::kScheme1:
      return "scheme1";
    case OverloadAveraging::kScheme2:
      return "scheme2";
    case OverloadAveraging::kNone:
      break;
  }
  return "none";
}

SimTime VbrParams::on_duration() const {
  return from_seconds(duty_cycle * to_seconds(period));
}

SimTime ScenarioConfig::cell_time() const {
  return from_seconds(kCellBits / (link_rate_mbps * 1e6));
}

double ScenarioConfig::icr_cells_per_s() const {
  if (abr.icr_mbps) return *abr.icr_mbps * 1e6 / kCellBits;
  return link_cell_rate() / n_sources;
}

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + key + ": " + message
                                  : key + ": " + message),
      line_(line),
      key_(std::move(key)) {}

SimTime propagation_delay(double length_km) {
  if (!(length_km > 0.0)) throw std::invalid_argument("link length must be positive");
  return from_micros(length_km * 5.0);
}

// The bottleneck is Switch1's output, so the loop is source -> Switch1 -> source.
SimTime feedback_delay(const ScenarioConfig& config) {
  return 2 * propagation_delay(config.link_length_km);
}

DerivedDelays derive_delays(const ScenarioConfig& config) {
  DerivedDelays d;
  d.one_way_prop = 3 * propagation_delay(config.link_length_km);
  d.rtt_prop = 2 * d.one_way_prop;
  d.feedback_delay = feedback_delay(config);
  d.rtt_cells = to_millis(d.rtt_prop) * kReportCellsPerMs;
  return d;
}

double max_throughput_bound(const ScenarioConfig& config) {
  const double mss = config.tcp.mss_bytes;
  return config.link_rate_mbps * config.erica.utilization() * (48.0 / 53.0) *
         (mss / (mss + 56.0)) * (31.0 / 32.0);
}

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

class LineParser {
 public:
  LineParser(std::size_t line, std::string key, std::string value)
      : line_(line), key_(std::move(key)), value_(std::move(value)) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(line_, key_, msg); }

  double number() const {
    double v = 0.0;
    const char* first = value_.data();
    const char* last = first + value_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      fail("expected a number, got '" + value_ + "'");
    }
    return v;
  }

  std::uint64_t integer() const {
    std::uint64_t v = 0;
    const char* first = value_.data();
    const char* last = first + value_.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("expected a non-negative integer, got '" + value_ + "'");
    return v;
  }

  bool boolean() const {
    if (value_ == "true" || value_ == "on" || value_ == "yes" || value_ == "1") return true;
    if (value_ == "false" || value_ == "off" || value_ == "no" || value_ == "0") return false;
    fail("expected a boolean, got '" + value_ + "'");
  }

  bool is_infinite() const { return value_ == "inf" || value_ == "infinite"; }

  double in_range(double lo, bool lo_open, double hi, bool hi_open) const {
    double v = number();
    bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok) {
      std::ostringstream os;
      os << "value " << v << " out of range " << (lo_open ? "(" : "[") << lo << ", " << hi
         << (hi_open ? ")" : "]");
      fail(os.str());
    }
    return v;
  }

  double positive() const { return in_range(0.0, true, HUGE_VAL, true); }

  std::uint64_t integer_at_least(std::uint64_t lo) const {
    std::uint64_t v = integer();
    if (v < lo) fail("value must be >= " + std::to_string(lo));
    return v;
  }

  const std::string& value() const { return value_; }

 private:
  std::size_t line_;
  std::string key_;
  std::string value_;
};

using Setter = std::function<void(ScenarioConfig&, const LineParser&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto buffer = [](const LineParser& p) -> std::optional<std::uint64_t> {
      if (p.is_infinite()) return std::nullopt;
      return p.integer_at_least(1);
    };
    t["scenario_id"] = [](ScenarioConfig& c, const LineParser& p) {
      if (p.value().empty()) p.fail("empty scenario id");
      c.scenario_id = p.value();
    };
    t["n_sources"] = [](ScenarioConfig& c, const LineParser& p) {
      std::uint64_t n = p.integer_at_least(1);
      if (n > 65535) p.fail("too many sources");
      c.n_sources = static_cast<std::uint32_t>(n);
    };
    t["link_length_km"] = [](ScenarioConfig& c, const LineParser& p) { c.link_length_km = p.positive(); };
    t["link_rate_mbps"] = [](ScenarioConfig& c, const LineParser& p) { c.link_rate_mbps = p.positive(); };
    t["duration_s"] = [](ScenarioConfig& c, const LineParser& p) { c.duration = from_seconds(p.positive()); };
    t["trace_interval_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.trace_interval = from_millis(p.positive());
      if (c.trace_interval == 0) p.fail("trace interval rounds to zero");
    };
    t["trace.per_vc"] = [](ScenarioConfig& c, const LineParser& p) { c.trace_per_vc = p.boolean(); };

    auto source_buffer = [buffer](ScenarioConfig& c, const LineParser& p) {
      c.abr.source_buffer_cells = buffer(p);
    };
    t["source_buffer_cells"] = source_buffer;
    t["abr.source_buffer_cells"] = source_buffer;
    auto switch_buffer = [buffer](ScenarioConfig& c, const LineParser& p) {
      c.switch_buffer_cells = buffer(p);
    };
    t["switch_buffer_cells"] = switch_buffer;
    t["switch.buffer_cells"] = switch_buffer;
    t["abr.icr_mbps"] = [](ScenarioConfig& c, const LineParser& p) { c.abr.icr_mbps = p.positive(); };
    t["abr.nrm"] = [](ScenarioConfig& c, const LineParser& p) {
      std::uint64_t n = p.integer_at_least(2);
      if (n > 256) p.fail("nrm must be <= 256");
      c.abr.nrm = static_cast<std::uint32_t>(n);
    };
    t["abr.infinite_demand"] = [](ScenarioConfig& c, const LineParser& p) {
      c.abr.infinite_demand = p.boolean();
    };

    t["vbr.enabled"] = [](ScenarioConfig& c, const LineParser& p) { c.vbr.enabled = p.boolean(); };
    t["vbr.duty_cycle"] = [](ScenarioConfig& c, const LineParser& p) {
      c.vbr.duty_cycle = p.in_range(0.0, true, 1.0, false);
    };
    t["vbr.period_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.vbr.period = from_millis(p.positive());
      if (c.vbr.period == 0) p.fail("period rounds to zero");
    };
    t["vbr.amplitude_mbps"] = [](ScenarioConfig& c, const LineParser& p) {
      c.vbr.amplitude_mbps = p.positive();
    };
    t["vbr.start_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.vbr.start_time = from_millis(p.in_range(0.0, false, HUGE_VAL, true));
    };

    t["erica.scheme"] = [](ScenarioConfig& c, const LineParser& p) {
      const std::string& v = p.value();
      if (v == "erica" || v == "ERICA") {
        c.erica.scheme = EricaScheme::kErica;
      } else if (v == "erica+" || v == "ERICA+" || v == "erica_plus") {
        c.erica.scheme = EricaScheme::kEricaPlus;
      } else {
        p.fail("expected erica or erica+");
      }
    };
    t["erica.u"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.target_utilization = p.in_range(0.0, true, 1.0, false);
    };
    t["erica.interval_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.interval_time = from_millis(p.positive());
      if (c.erica.interval_time == 0) p.fail("interval rounds to zero");
    };
    t["erica.interval_cells"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.interval_cells = static_cast<std::uint32_t>(p.integer_at_least(1));
    };
    t["erica.t0_us"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.t0 = from_micros(p.positive());
    };
    t["erica.a"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.a = p.in_range(1.0, true, HUGE_VAL, true);
    };
    t["erica.b"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.b = p.in_range(1.0, true, HUGE_VAL, true);
    };
    t["erica.qdlf"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.qdlf = p.in_range(0.0, true, 1.0, true);
    };
    t["erica.na_averaging"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.na_averaging = p.boolean();
    };
    t["erica.alpha_n"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.alpha_n = p.in_range(0.0, true, 1.0, true);
    };
    t["erica.z_averaging"] = [](ScenarioConfig& c, const LineParser& p) {
      const std::string& v = p.value();
      if (v == "none" || v == "off") {
        c.erica.z_averaging = OverloadAveraging::kNone;
      } else if (v == "scheme1") {
        c.erica.z_averaging = OverloadAveraging::kScheme1;
      } else if (v == "scheme2") {
        c.erica.z_averaging = OverloadAveraging::kScheme2;
      } else {
        p.fail("expected none, scheme1 or scheme2");
      }
    };
    t["erica.alpha_z"] = [](ScenarioConfig& c, const LineParser& p) {
      c.erica.alpha_z = p.in_range(0.0, true, 1.0, false);
    };

    t["tcp.mss_bytes"] = [](ScenarioConfig& c, const LineParser& p) {
      std::uint64_t mss = p.integer_at_least(1);
      if (mss > 65535) p.fail("mss must fit in 16 bits");
      c.tcp.mss_bytes = static_cast<std::uint32_t>(mss);
    };
    t["tcp.window_scale"] = [](ScenarioConfig& c, const LineParser& p) {
      std::uint64_t ws = p.integer();
      if (ws > 14) p.fail("window scale must be <= 14");
      c.tcp.window_scale = static_cast<std::uint32_t>(ws);
    };
    t["tcp.timer_granularity_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.tcp.timer_granularity = from_millis(p.positive());
      if (c.tcp.timer_granularity == 0) p.fail("granularity rounds to zero");
    };
    t["tcp.initial_rto_ms"] = [](ScenarioConfig& c, const LineParser& p) {
      c.tcp.initial_rto = from_millis(p.positive());
    };
    return t;
  }();
  return table;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig config;
  std::map<std::string, std::size_t, std::less<>> seen;
  bool vbr_enabled_explicit = false;
  bool vbr_shape_given = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;

    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line_no, std::string(line), "expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, "<empty>", "missing key");

    auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(line_no, key, "unknown key");
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(line_no, key, "duplicate key (first set on line " +
                                          std::to_string(prev->second) + ")");
    }
    seen.emplace(key, line_no);
    if (value.empty()) throw ConfigError(line_no, key, "missing value");

    it->second(config, LineParser(line_no, key, value));

    if (key == "vbr.enabled") vbr_enabled_explicit = true;
    if (key.rfind("vbr.", 0) == 0 && key != "vbr.enabled") vbr_shape_given = true;
  }

  // Any VBR shape key switches the source on unless it was disabled explicitly.
  if (vbr_shape_given && !vbr_enabled_explicit) config.vbr.enabled = true;

  auto line_of = [&](std::string_view key) -> std::size_t {
    auto it = seen.find(key);
    return it == seen.end() ? 0 : it->second;
  };
  if (config.vbr.amplitude_mbps > config.link_rate_mbps) {
    throw ConfigError(line_of("vbr.amplitude_mbps"), "vbr.amplitude_mbps",
                      "amplitude exceeds link rate");
  }
  if (config.abr.icr_mbps && *config.abr.icr_mbps > config.link_rate_mbps) {
    throw ConfigError(line_of("abr.icr_mbps"), "abr.icr_mbps", "ICR exceeds link rate");
  }
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, path, "cannot open configuration file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void validate(const ScenarioConfig& c) {
  if (c.n_sources < 1) throw ConfigError(0, "n_sources", "must be >= 1");
  if (!(c.link_length_km > 0.0)) throw ConfigError(0, "link_length_km", "must be positive");
  if (!(c.link_rate_mbps > 0.0)) throw ConfigError(0, "link_rate_mbps", "must be positive");
  if (c.duration == 0) throw ConfigError(0, "duration_s", "must be positive");
  if (c.trace_interval == 0) throw ConfigError(0, "trace_interval_ms", "must be positive");
  if (c.vbr.enabled) {
    if (!(c.vbr.duty_cycle > 0.0 && c.vbr.duty_cycle <= 1.0)) {
      throw ConfigError(0, "vbr.duty_cycle", "must be in (0, 1]");
    }
    if (c.vbr.period == 0) throw ConfigError(0, "vbr.period_ms", "must be positive");
    if (!(c.vbr.amplitude_mbps > 0.0) || c.vbr.amplitude_mbps > c.link_rate_mbps) {
      throw ConfigError(0, "vbr.amplitude_mbps", "must be in (0, link rate]");
    }
  }
  const EricaParams& e = c.erica;
  if (!(e.target_utilization > 0.0 && e.target_utilization <= 1.0)) {
    throw ConfigError(0, "erica.u", "must be in (0, 1]");
  }
  if (!(e.a > 1.0)) throw ConfigError(0, "erica.a", "must be > 1");
  if (!(e.b > 1.0)) throw ConfigError(0, "erica.b", "must be > 1");
  if (!(e.qdlf > 0.0 && e.qdlf < 1.0)) throw ConfigError(0, "erica.qdlf", "must be in (0, 1)");
  if (!(e.alpha_n > 0.0 && e.alpha_n < 1.0)) throw ConfigError(0, "erica.alpha_n", "must be in (0, 1)");
  if (!(e.alpha_z > 0.0 && e.alpha_z <= 1.0)) throw ConfigError(0, "erica.alpha_z", "must be in (0, 1]");
  if (e.interval_time == 0 || e.interval_cells == 0) {
    throw ConfigError(0, "erica.interval_ms", "interval must be positive");
  }
  if (c.abr.nrm < 2) throw ConfigError(0, "abr.nrm", "must be >= 2");
  if (c.abr.source_buffer_cells && *c.abr.source_buffer_cells == 0) {
    throw ConfigError(0, "abr.source_buffer_cells", "must be >= 1");
  }
}

}  // namespace abrsim
