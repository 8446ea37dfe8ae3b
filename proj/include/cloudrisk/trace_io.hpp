#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cloudrisk/cluster.hpp"
#include "cloudrisk/forecaster.hpp"
#include "cloudrisk/records.hpp"

namespace cloudrisk {

struct SimConfig;

// ---------------------------------------------------------------------------
// Ingestion

struct TraceRow {
  std::string vm_id;
  std::int64_t timestamp = 0;  // seconds
  double cpu = 0.0;
  double mem = 0.0;
  double bw = 0.0;
};

// Column names of the source CSV. An empty bw column means bandwidth is
// absent and read as 0.
struct TraceMapping {
  std::string id_column = "vm_id";
  std::string timestamp_column = "timestamp";
  std::string cpu_column = "cpu";
  std::string mem_column = "mem";
  std::string bw_column = "bw";
  bool bw_optional = true;
  std::int64_t interval_seconds = 300;
  double max_reject_fraction = 0.10;
};

struct IngestIssue {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<UtilizationSeries> series;  // series[i].vm_id == i
  std::vector<std::string> source_ids;    // original id of series i
  std::vector<IngestIssue> rejected;
  std::vector<IngestIssue> warnings;  // duplicates and clamped values
  std::size_t rows = 0;
  std::size_t clamped = 0;
  std::size_t duplicates = 0;
  std::size_t gaps = 0;
};

// Groups rows by id, buckets them onto the shared 5-minute grid (mean within a
// bucket) and zero-fills missing buckets. Throws InputError when the header
// lacks a mapped column or more than `max_reject_fraction` of rows are bad.
IngestResult ingest(std::istream& in, const TraceMapping& mapping);
IngestResult ingest(const std::string& path, const TraceMapping& mapping);

// Writes series as `vm_id,timestamp,cpu,mem,bw` rows on the grid.
void write_traces(std::ostream& out, const std::vector<UtilizationSeries>& series,
                  std::int64_t interval_seconds = 300);
void save_traces(const std::string& path,
                 const std::vector<UtilizationSeries>& series);

// ---------------------------------------------------------------------------
// Synthesis

struct PatternMix {
  double constant = 0.4;
  double periodic = 0.3;
  double bursty = 0.3;
};

struct SynthesisSpec {
  std::size_t vm_count = 120;
  std::size_t samples = 144;  // trace length on the 5-minute grid
  PatternMix mix;
  double malicious_fraction = 0.05;
  double mean_on = 30.0;    // mean busy period, samples
  double mean_off = 220.0;  // mean idle period, samples
  std::uint64_t seed = 1;
};

// Throws ConfigError when the mix weights do not sum to 1 or a field is out
// of range.
void validate(const SynthesisSpec& spec);

enum class UsagePattern { kConstant, kPeriodic, kBursty };

// Seeded busy/idle series; idle samples are exactly zero and busy samples are
// at least 0.05 on cpu.
std::vector<UtilizationSeries> synthesize_traces(const SynthesisSpec& spec);

struct Synthesis {
  std::vector<UtilizationSeries> traces;
  std::vector<UserRecord> users;
  std::vector<ThreatRecord> threat_db;  // labelled burn-in rows
};

// Traces plus the user and threat databases produced by a burn-in run of the
// simulator over `base`, with the spec's VM count, fraction and seed applied.
Synthesis synthesize(const SynthesisSpec& spec, const SimConfig& base);

// ---------------------------------------------------------------------------
// Persistence. Every file opens with a `#format=<name>;version=<n>` line.

inline constexpr int kThreatDbVersion = 1;
inline constexpr int kUserDbVersion = 1;
inline constexpr int kAccessLogVersion = 1;

void write_threat_db(std::ostream& out, const std::vector<ThreatRecord>& rows);
std::vector<ThreatRecord> read_threat_db(std::istream& in);
void save_threat_db(const std::string& path,
                    const std::vector<ThreatRecord>& rows);
std::vector<ThreatRecord> load_threat_db(const std::string& path);

// Users go to one file, their access histories to an access log.
void write_user_db(std::ostream& out, const std::vector<UserRecord>& users);
std::vector<UserRecord> read_user_db(std::istream& in);
void write_access_log(std::ostream& out, const std::vector<UserRecord>& users);
// Appends the logged events to the matching users' histories.
void read_access_log(std::istream& in, std::vector<UserRecord>& users);
void save_user_db(const std::string& users_path, const std::string& log_path,
                  const std::vector<UserRecord>& users);
std::vector<UserRecord> load_user_db(const std::string& users_path,
                                     const std::string& log_path);

void write_reports(std::ostream& out, const std::vector<IntervalReport>& reports);
std::vector<IntervalReport> read_reports(std::istream& in);
void save_reports(const std::string& path,
                  const std::vector<IntervalReport>& reports);
std::vector<IntervalReport> load_reports(const std::string& path);

void save_forecaster(const std::string& path, const ForecasterModel& model);
ForecasterModel load_forecaster(const std::string& path);

}  // namespace cloudrisk
