#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "fracrc/serialization.hpp"

namespace fracrc {

using Row = std::vector<std::string>;

/// CSV cell for a metric: shortest round-trip text, empty for NaN.
std::string cell(double v);
std::string cell(std::uint64_t v);
std::string cell(int v);
std::string cell(bool v);

/// Parse a metric cell written by cell(double); empty means NaN.
double parse_cell(const std::string& s);

struct CsvTable {
  Row header;
  std::vector<Row> rows;

  std::size_t column(const std::string& name) const;  // throws ConfigError if absent
};

/// Rows whose field count differs from the header are skipped. With
/// drop_unterminated, so is a last line without its newline (a row torn by
/// an interrupted writer).
CsvTable read_csv_table(const std::string& path, bool drop_unterminated = false);
void write_csv_table(const std::string& path, const CsvTable& table);

/// Orders rows by their first `key_columns` fields, comparing numerically
/// when both fields parse as numbers.
void sort_rows(std::vector<Row>& rows, std::size_t key_columns);

/// Keyed, append-only result persistence. Rows go to `<dir>/<name>.partial.csv`
/// as soon as a cell completes (one writer, serialized by a mutex); finalize()
/// sorts them by key into `<dir>/<name>.csv`. With resume, rows already
/// present in either file are kept and their keys reported as done.
class ResultsWriter {
 public:
  ResultsWriter(std::string dir, std::string name, Row header, std::size_t key_columns, bool resume);

  bool done(const Row& key) const;
  std::size_t completed() const;
  void append(const Row& row);
  /// Writes the sorted table and removes the partial file; returns its path.
  std::string finalize();
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::string dir_;
  std::string partial_path_;
  std::string final_path_;
  Row header_;
  std::size_t key_columns_;
  std::vector<Row> rows_;
  std::set<Row> keys_;
  std::ofstream out_;
  mutable std::mutex mutex_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

std::string config_hash(const Json& config);

/// Writes `<dir>/manifest.json` with the config and its hash, seed, code
/// version, kernel ISA and run status.
void write_manifest(const std::string& dir, const std::string& recipe, const Json& config, std::uint64_t seed,
                    const Json& status);

/// Throws ConfigError if `<dir>/manifest.json` exists with a different
/// config hash or seed; resuming such a run would mix incompatible rows.
void check_resume_manifest(const std::string& dir, const Json& config, std::uint64_t seed);

const char* code_version();

}  // namespace fracrc
