#include "cloudrisk/trace_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "cloudrisk/csv.hpp"
#include "cloudrisk/errors.hpp"
#include "cloudrisk/rng.hpp"
#include "cloudrisk/simulator.hpp"

namespace cloudrisk {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

std::string where(const CsvRecord& r) {
  return "line " + std::to_string(r.line) + " (byte offset " +
         std::to_string(r.offset) + ")";
}

// Integer ids sort numerically and ahead of other ids.
bool id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && s.size() < 19 &&
           std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  const bool na = numeric(a);
  const bool nb = numeric(b);
  if (na && nb) return std::stoll(a) < std::stoll(b);
  if (na != nb) return na;
  return a < b;
}

void write_preamble(std::ostream& out, const char* format, int version) {
  out << "#format=" << format << ";version=" << version << '\n';
}

void read_preamble(CsvReader& reader, const std::string& format, int expected) {
  const auto line = reader.raw_line();
  const std::string prefix = "#format=" + format + ";version=";
  if (!line) throw InputError(format + ": empty file, versioned header missing");
  if (line->rfind("#format=", 0) != 0) {
    throw InputError(format + ": versioned header missing");
  }
  if (line->rfind(prefix, 0) != 0) {
    throw InputError(format + ": file holds '" + line->substr(1) + "'");
  }
  const auto version = static_cast<int>(
      parse_int(std::string_view(*line).substr(prefix.size()), format + " version"));
  if (version != expected) throw VersionError(format, version, expected);
}

void read_header(CsvReader& reader, const std::string& format,
                 const std::vector<std::string>& expected) {
  const auto header = reader.next();
  if (!header) throw InputError(format + ": column header missing");
  if (!header->terminated) {
    throw InputError(format + ": truncated file at byte offset " +
                     std::to_string(header->offset));
  }
  if (header->fields != expected) {
    throw InputError(format + ": unexpected column header at " + where(*header));
  }
}

// Next data record with exactly `width` fields, or nullopt at end of input.
std::optional<CsvRecord> next_row(CsvReader& reader, const std::string& format,
                                  std::size_t width) {
  auto rec = reader.next();
  if (!rec) return std::nullopt;
  if (!rec->terminated) {
    throw InputError(format + ": truncated file, incomplete record at byte offset " +
                     std::to_string(rec->offset));
  }
  if (rec->fields.size() != width) {
    throw InputError(format + ": " + where(*rec) + " has " +
                     std::to_string(rec->fields.size()) + " fields, expected " +
                     std::to_string(width));
  }
  return rec;
}

std::uint32_t parse_u32(const std::string& s, const std::string& what) {
  const long long v = parse_int(s, what);
  if (v < 0 || v > static_cast<long long>(UINT32_MAX)) {
    throw InputError(what + " out of range: " + s);
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Ingestion

IngestResult ingest(std::istream& in, const TraceMapping& mapping) {
  if (mapping.interval_seconds <= 0) {
    throw ConfigError("trace interval must be positive");
  }
  CsvReader reader(in);
  const auto header = reader.next();
  if (!header) throw InputError("trace file is empty");

  auto column = [&](const std::string& name, bool optional) -> long {
    const auto it = std::find(header->fields.begin(), header->fields.end(), name);
    if (it == header->fields.end()) {
      if (optional) return -1;
      throw InputError("trace header lacks column '" + name + "'");
    }
    return it - header->fields.begin();
  };
  const long c_id = column(mapping.id_column, false);
  const long c_ts = column(mapping.timestamp_column, false);
  const long c_cpu = column(mapping.cpu_column, false);
  const long c_mem = column(mapping.mem_column, false);
  const long c_bw = mapping.bw_column.empty()
                        ? -1
                        : column(mapping.bw_column, mapping.bw_optional);

  IngestResult out;
  std::vector<std::pair<TraceRow, std::size_t>> rows;
  auto clamp_unit = [&](double v, std::size_t line, const char* what) {
    if (v >= 0.0 && v <= 1.0) return v;
    ++out.clamped;
    out.warnings.push_back({line, std::string(what) + " value " +
                                      format_double(v) + " clamped to [0, 1]"});
    return std::clamp(v, 0.0, 1.0);
  };

  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && rec->fields[0].empty()) continue;
    ++out.rows;
    try {
      if (rec->fields.size() != header->fields.size()) {
        throw InputError("expected " + std::to_string(header->fields.size()) +
                         " fields, got " + std::to_string(rec->fields.size()));
      }
      TraceRow row;
      row.vm_id = rec->fields[c_id];
      if (row.vm_id.empty()) throw InputError("empty id");
      row.timestamp = parse_int(rec->fields[c_ts], "timestamp");
      if (row.timestamp < 0) throw InputError("negative timestamp");
      const double cpu = parse_double(rec->fields[c_cpu], "cpu");
      const double mem = parse_double(rec->fields[c_mem], "mem");
      const double bw = c_bw >= 0 ? parse_double(rec->fields[c_bw], "bw") : 0.0;
      if (std::isnan(cpu) || std::isnan(mem) || std::isnan(bw)) {
        throw InputError("usage value is NaN");
      }
      row.cpu = clamp_unit(cpu, rec->line, "cpu");
      row.mem = clamp_unit(mem, rec->line, "mem");
      row.bw = clamp_unit(bw, rec->line, "bw");
      rows.emplace_back(std::move(row), rec->line);
    } catch (const InputError& e) {
      out.rejected.push_back({rec->line, e.what()});
    }
  }

  if (!out.rejected.empty() &&
      static_cast<double>(out.rejected.size()) >
          mapping.max_reject_fraction * static_cast<double>(out.rows)) {
    const auto& first = out.rejected.front();
    throw InputError(std::to_string(out.rejected.size()) + " of " +
                     std::to_string(out.rows) +
                     " trace rows rejected; first bad line " +
                     std::to_string(first.line) + ": " + first.message);
  }
  if (rows.empty()) return out;

  std::int64_t t0 = rows.front().first.timestamp;
  for (const auto& [r, line] : rows) t0 = std::min(t0, r.timestamp);

  struct Bucket {
    double cpu = 0.0, mem = 0.0, bw = 0.0;
    int count = 0;
  };
  std::map<std::string, std::map<std::int64_t, Bucket>, decltype(&id_less)> grid(
      &id_less);
  std::int64_t last = 0;
  for (const auto& [r, line] : rows) {
    const std::int64_t b = (r.timestamp - t0) / mapping.interval_seconds;
    last = std::max(last, b);
    Bucket& k = grid[r.vm_id][b];
    if (k.count > 0) {
      ++out.duplicates;
      out.warnings.push_back({line, "duplicate sample for '" + r.vm_id +
                                        "' in one interval averaged"});
    }
    k.cpu += r.cpu;
    k.mem += r.mem;
    k.bw += r.bw;
    ++k.count;
  }

  const auto length = static_cast<std::size_t>(last + 1);
  for (const auto& [id, buckets] : grid) {
    UtilizationSeries s;
    s.vm_id = static_cast<std::uint32_t>(out.series.size());
    s.cpu.assign(length, 0.0);
    s.mem.assign(length, 0.0);
    s.bw.assign(length, 0.0);
    s.gap.assign(length, true);
    for (const auto& [b, k] : buckets) {
      const auto i = static_cast<std::size_t>(b);
      s.cpu[i] = k.cpu / k.count;
      s.mem[i] = k.mem / k.count;
      s.bw[i] = k.bw / k.count;
      s.gap[i] = false;
    }
    out.gaps += static_cast<std::size_t>(std::count(s.gap.begin(), s.gap.end(), true));
    out.source_ids.push_back(id);
    out.series.push_back(std::move(s));
  }
  if (out.duplicates > 0) {
    spdlog::warn("{} duplicate trace samples averaged", out.duplicates);
  }
  return out;
}

IngestResult ingest(const std::string& path, const TraceMapping& mapping) {
  auto in = open_in(path);
  return ingest(in, mapping);
}

void write_traces(std::ostream& out, const std::vector<UtilizationSeries>& series,
                  std::int64_t interval_seconds) {
  write_csv_row(out, {"vm_id", "timestamp", "cpu", "mem", "bw"});
  for (const auto& s : series) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      write_csv_row(out, {std::to_string(s.vm_id),
                          std::to_string(static_cast<std::int64_t>(t) * interval_seconds),
                          format_double(s.cpu[t]),
                          format_double(t < s.mem.size() ? s.mem[t] : 0.0),
                          format_double(t < s.bw.size() ? s.bw[t] : 0.0)});
    }
  }
}

void save_traces(const std::string& path,
                 const std::vector<UtilizationSeries>& series) {
  auto out = open_out(path);
  write_traces(out, series);
  finish(out, path);
}

// ---------------------------------------------------------------------------
// Synthesis

void validate(const SynthesisSpec& spec) {
  const auto& m = spec.mix;
  if (m.constant < 0 || m.periodic < 0 || m.bursty < 0 ||
      std::abs(m.constant + m.periodic + m.bursty - 1.0) > 1e-9) {
    throw ConfigError("usage pattern weights must be non-negative and sum to 1");
  }
  if (spec.malicious_fraction < 0.0 || spec.malicious_fraction > 1.0) {
    throw ConfigError("malicious fraction must lie in [0, 1]");
  }
  if (spec.vm_count == 0 || spec.samples == 0) {
    throw ConfigError("synthesis needs at least one VM and one sample");
  }
  if (spec.mean_on < 1.0 || spec.mean_off < 1.0) {
    throw ConfigError("mean busy and idle periods must be at least 1 sample");
  }
}

std::vector<UtilizationSeries> synthesize_traces(const SynthesisSpec& spec) {
  validate(spec);
  const Rng root(spec.seed);
  const double duty = spec.mean_on / (spec.mean_on + spec.mean_off);
  std::vector<UtilizationSeries> out;
  out.reserve(spec.vm_count);
  for (std::size_t v = 0; v < spec.vm_count; ++v) {
    Rng rng = root.fork(1000 + v);
    UtilizationSeries s;
    s.vm_id = static_cast<std::uint32_t>(v);
    s.cpu.assign(spec.samples, 0.0);
    s.mem.assign(spec.samples, 0.0);
    s.bw.assign(spec.samples, 0.0);
    s.gap.assign(spec.samples, false);

    const double pick = rng.uniform();
    const UsagePattern pattern =
        pick < spec.mix.constant ? UsagePattern::kConstant
        : pick < spec.mix.constant + spec.mix.periodic ? UsagePattern::kPeriodic
                                                       : UsagePattern::kBursty;
    const double level = rng.uniform(0.2, 0.9);
    const double amplitude = rng.uniform(0.1, 0.4);
    const double period = rng.uniform(12.0, 288.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double mem_level = rng.uniform(0.1, 0.4);
    const double bw_level = rng.uniform(0.0, 0.3);

    bool on = rng.bernoulli(duty);
    int left = rng.geometric(on ? spec.mean_on : spec.mean_off);
    for (std::size_t t = 0; t < spec.samples; ++t) {
      if (left == 0) {
        on = !on;
        left = rng.geometric(on ? spec.mean_on : spec.mean_off);
      }
      --left;
      if (!on) continue;
      double cpu = level;
      switch (pattern) {
        case UsagePattern::kConstant:
          cpu = level + 0.02 * rng.normal();
          break;
        case UsagePattern::kPeriodic:
          cpu = level + amplitude * std::sin(2.0 * std::numbers::pi *
                                                 static_cast<double>(t) / period +
                                             phase);
          break;
        case UsagePattern::kBursty:
          cpu = rng.bernoulli(0.1) ? rng.uniform(0.6, 1.0)
                                   : 0.3 * level + 0.02 * rng.normal();
          break;
      }
      cpu = std::clamp(cpu, 0.05, 1.0);
      s.cpu[t] = cpu;
      s.mem[t] = std::clamp(mem_level + 0.5 * cpu, 0.05, 1.0);
      s.bw[t] = std::clamp(bw_level + 0.05 * rng.normal(), 0.0, 1.0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

Synthesis synthesize(const SynthesisSpec& spec, const SimConfig& base) {
  validate(spec);
  SimConfig cfg = base;
  cfg.cluster.malicious_fraction = spec.malicious_fraction;
  cfg.cluster.seed = spec.seed;
  cfg.intervals = 0;
  cfg.predictor = false;
  cfg.forecaster.seed = spec.seed;
  std::size_t vms = 0;
  for (const auto& [type, count] : cfg.cluster.vm_counts) {
    vms += static_cast<std::size_t>(count);
  }
  if (vms != spec.vm_count) {
    throw ConfigError("synthesis VM count " + std::to_string(spec.vm_count) +
                      " differs from the cluster's " + std::to_string(vms));
  }
  if (spec.samples < static_cast<std::size_t>(cfg.history + cfg.burn_in)) {
    throw ConfigError("synthesis needs at least history + burn-in samples");
  }
  Synthesis out;
  out.traces = synthesize_traces(spec);
  SimResult r = run(cfg, SimInputs{out.traces, {}});
  out.users = std::move(r.users);
  out.threat_db = std::move(r.threat_db);
  return out;
}

// ---------------------------------------------------------------------------
// Threat database

namespace {

const std::vector<std::string>& threat_columns() {
  static const std::vector<std::string> cols = {
      "victim_vm_id", "server_id", "attacker_vm_id", "vm_cpu", "vm_bw",
      "vm_mem", "r_score", "L", "H", "C", "N", "vm_status", "interval", "w_p",
      "owner_class", "coresident_behavior", "has_malicious_coresident",
      "cascade_exposure", "coresident_count", "threat_indicator"};
  return cols;
}

}  // namespace

void write_threat_db(std::ostream& out, const std::vector<ThreatRecord>& rows) {
  write_preamble(out, "threat_db", kThreatDbVersion);
  write_csv_row(out, threat_columns());
  for (const auto& r : rows) {
    write_csv_row(
        out, {std::to_string(r.victim_vm_id), std::to_string(r.server_id),
              r.attacker_vm_id ? std::to_string(*r.attacker_vm_id) : "",
              format_double(r.vm_cpu), format_double(r.vm_bw),
              format_double(r.vm_mem), format_double(r.r_score),
              format_double(r.L), format_double(r.H), format_double(r.C),
              format_double(r.N), std::to_string(r.vm_status),
              std::to_string(r.interval), format_double(r.w_p),
              std::to_string(r.owner_class), std::to_string(r.coresident_behavior),
              std::to_string(r.has_malicious_coresident),
              format_double(r.cascade_exposure),
              std::to_string(r.coresident_count),
              std::to_string(r.threat_indicator)});
  }
}

std::vector<ThreatRecord> read_threat_db(std::istream& in) {
  const std::string fmt = "threat_db";
  CsvReader reader(in);
  read_preamble(reader, fmt, kThreatDbVersion);
  read_header(reader, fmt, threat_columns());
  std::vector<ThreatRecord> rows;
  while (auto rec = next_row(reader, fmt, threat_columns().size())) {
    const auto& f = rec->fields;
    try {
      ThreatRecord r;
      r.victim_vm_id = parse_u32(f[0], "victim_vm_id");
      r.server_id = parse_u32(f[1], "server_id");
      if (!f[2].empty()) r.attacker_vm_id = parse_u32(f[2], "attacker_vm_id");
      r.vm_cpu = parse_double(f[3], "vm_cpu");
      r.vm_bw = parse_double(f[4], "vm_bw");
      r.vm_mem = parse_double(f[5], "vm_mem");
      r.r_score = parse_double(f[6], "r_score");
      r.L = parse_double(f[7], "L");
      r.H = parse_double(f[8], "H");
      r.C = parse_double(f[9], "C");
      r.N = parse_double(f[10], "N");
      r.vm_status = static_cast<int>(parse_int(f[11], "vm_status"));
      if (r.vm_status != 0 && r.vm_status != 1) {
        throw InputError("vm_status must be 0 or 1");
      }
      r.interval = static_cast<int>(parse_int(f[12], "interval"));
      r.w_p = parse_double(f[13], "w_p");
      r.owner_class = static_cast<int>(parse_int(f[14], "owner_class"));
      r.coresident_behavior =
          static_cast<int>(parse_int(f[15], "coresident_behavior"));
      r.has_malicious_coresident =
          static_cast<int>(parse_int(f[16], "has_malicious_coresident"));
      r.cascade_exposure = parse_double(f[17], "cascade_exposure");
      r.coresident_count = static_cast<int>(parse_int(f[18], "coresident_count"));
      r.threat_indicator = static_cast<int>(parse_int(f[19], "threat_indicator"));
      rows.push_back(r);
    } catch (const InputError& e) {
      throw InputError(fmt + ": " + where(*rec) + ": " + e.what());
    }
  }
  return rows;
}

void save_threat_db(const std::string& path,
                    const std::vector<ThreatRecord>& rows) {
  auto out = open_out(path);
  write_threat_db(out, rows);
  finish(out, path);
}

std::vector<ThreatRecord> load_threat_db(const std::string& path) {
  auto in = open_in(path);
  return read_threat_db(in);
}

// ---------------------------------------------------------------------------
// User database and access log

namespace {

BehaviorClass parse_class(const std::string& s) {
  for (auto c : {BehaviorClass::kUnknown, BehaviorClass::kTrusted,
                 BehaviorClass::kNonTrusted}) {
    if (s == to_string(c)) return c;
  }
  throw InputError("unknown behaviour class '" + s + "'");
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw InputError(what + " must be 0 or 1");
}

const std::vector<std::string>& user_columns() {
  static const std::vector<std::string> cols = {"u_id", "attack_threshold",
                                                "u_class", "is_malicious"};
  return cols;
}

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = {
      "u_id", "actor_vm", "target_kind", "target_id", "interval", "authorized"};
  return cols;
}

}  // namespace

void write_user_db(std::ostream& out, const std::vector<UserRecord>& users) {
  write_preamble(out, "user_db", kUserDbVersion);
  write_csv_row(out, user_columns());
  for (const auto& u : users) {
    write_csv_row(out, {std::to_string(u.id.value), format_double(u.attack_threshold),
                        to_string(u.behavior_class),
                        u.is_malicious_ground_truth ? "1" : "0"});
  }
}

std::vector<UserRecord> read_user_db(std::istream& in) {
  const std::string fmt = "user_db";
  CsvReader reader(in);
  read_preamble(reader, fmt, kUserDbVersion);
  read_header(reader, fmt, user_columns());
  std::vector<UserRecord> users;
  while (auto rec = next_row(reader, fmt, user_columns().size())) {
    const auto& f = rec->fields;
    try {
      UserRecord u;
      u.id = UserId(parse_u32(f[0], "u_id"));
      if (u.id.value != users.size()) {
        throw InputError("user ids must be dense and ascending");
      }
      u.attack_threshold = parse_double(f[1], "attack_threshold");
      u.behavior_class = parse_class(f[2]);
      u.is_malicious_ground_truth = parse_bool(f[3], "is_malicious");
      users.push_back(std::move(u));
    } catch (const InputError& e) {
      throw InputError(fmt + ": " + where(*rec) + ": " + e.what());
    }
  }
  return users;
}

void write_access_log(std::ostream& out, const std::vector<UserRecord>& users) {
  write_preamble(out, "access_log", kAccessLogVersion);
  write_csv_row(out, log_columns());
  for (const auto& u : users) {
    for (const auto& e : u.access_history) {
      const bool vm = e.targets_vm();
      const auto target = vm ? std::get<VmId>(e.target).value
                             : std::get<ServerId>(e.target).value;
      write_csv_row(out, {std::to_string(e.actor_user.value),
                          std::to_string(e.actor_vm.value), vm ? "vm" : "server",
                          std::to_string(target), std::to_string(e.interval),
                          e.authorized ? "1" : "0"});
    }
  }
}

void read_access_log(std::istream& in, std::vector<UserRecord>& users) {
  const std::string fmt = "access_log";
  CsvReader reader(in);
  read_preamble(reader, fmt, kAccessLogVersion);
  read_header(reader, fmt, log_columns());
  while (auto rec = next_row(reader, fmt, log_columns().size())) {
    const auto& f = rec->fields;
    try {
      AccessEvent e;
      e.actor_user = UserId(parse_u32(f[0], "u_id"));
      if (e.actor_user.value >= users.size()) {
        throw InputError("event for unknown user " + f[0]);
      }
      e.actor_vm = VmId(parse_u32(f[1], "actor_vm"));
      const std::uint32_t target = parse_u32(f[3], "target_id");
      if (f[2] == "vm") {
        e.target = VmId(target);
      } else if (f[2] == "server") {
        e.target = ServerId(target);
      } else {
        throw InputError("target_kind must be vm or server");
      }
      e.interval = static_cast<int>(parse_int(f[4], "interval"));
      e.authorized = parse_bool(f[5], "authorized");
      users[e.actor_user.value].access_history.push_back(e);
    } catch (const InputError& e) {
      throw InputError(fmt + ": " + where(*rec) + ": " + e.what());
    }
  }
}

void save_user_db(const std::string& users_path, const std::string& log_path,
                  const std::vector<UserRecord>& users) {
  auto out = open_out(users_path);
  write_user_db(out, users);
  finish(out, users_path);
  auto log = open_out(log_path);
  write_access_log(log, users);
  finish(log, log_path);
}

std::vector<UserRecord> load_user_db(const std::string& users_path,
                                     const std::string& log_path) {
  auto in = open_in(users_path);
  auto users = read_user_db(in);
  auto log = open_in(log_path);
  read_access_log(log, users);
  return users;
}

// ---------------------------------------------------------------------------
// Interval reports (JSON lines)

void write_reports(std::ostream& out, const std::vector<IntervalReport>& reports) {
  for (const auto& r : reports) out << report_to_json(r).dump() << '\n';
}

std::vector<IntervalReport> read_reports(std::istream& in) {
  std::vector<IntervalReport> out;
  std::size_t offset = 0;
  std::size_t line_no = 1;
  std::string line;
  while (true) {
    const std::size_t start = offset;
    line.clear();
    bool terminated = false;
    for (int c = in.get(); c != std::char_traits<char>::eof(); c = in.get()) {
      ++offset;
      if (c == '\n') {
        terminated = true;
        break;
      }
      line.push_back(static_cast<char>(c));
    }
    if (line.empty() && !terminated) break;
    if (!terminated) {
      throw InputError("reports: truncated file, incomplete line at byte offset " +
                       std::to_string(start));
    }
    if (!line.empty()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError("reports: line " + std::to_string(line_no) +
                         " is not valid JSON (byte offset " +
                         std::to_string(start + e.byte - 1) + ")");
      }
      out.push_back(report_from_json(j));
    }
    ++line_no;
  }
  return out;
}

void save_reports(const std::string& path,
                  const std::vector<IntervalReport>& reports) {
  auto out = open_out(path);
  write_reports(out, reports);
  finish(out, path);
}

std::vector<IntervalReport> load_reports(const std::string& path) {
  auto in = open_in(path);
  return read_reports(in);
}

// ---------------------------------------------------------------------------
// Forecaster model

void save_forecaster(const std::string& path, const ForecasterModel& model) {
  auto out = open_out(path);
  out << forecaster_to_json(model).dump(1) << '\n';
  finish(out, path);
}

ForecasterModel load_forecaster(const std::string& path) {
  auto in = open_in(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": truncated or malformed JSON at byte offset " +
                     std::to_string(e.byte));
  }
  return forecaster_from_json(doc);
}

}  // namespace cloudrisk
