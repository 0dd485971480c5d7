#include "fracrc/harness/results_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fracrc/simd/kernels.hpp"

#ifndef FRACRC_VERSION
#define FRACRC_VERSION "dev"
#endif

namespace fracrc {

namespace fs = std::filesystem;

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

double parse_cell(const std::string& s) { return s.empty() ? std::nan("") : parse_double(s); }

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv_table(const std::string& path, bool drop_unterminated) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + " is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (drop_unterminated && in.eof()) break;
    Row r = split_csv_line(line);
    if (r.size() != t.header.size()) continue;
    t.rows.push_back(std::move(r));
  }
  return t;
}

namespace {

void write_row(std::ostream& os, const Row& r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0) os << ',';
    os << r[i];
  }
  os << '\n';
}

bool as_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  try {
    v = parse_double(s);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

}  // namespace

void write_csv_table(const std::string& path, const CsvTable& table) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    write_row(out, table.header);
    for (const Row& r : table.rows) write_row(out, r);
    if (!out) throw Error("write failed: " + path);
  }
  fs::rename(tmp, path);
}

void sort_rows(std::vector<Row>& rows, std::size_t key_columns) {
  std::stable_sort(rows.begin(), rows.end(), [key_columns](const Row& a, const Row& b) {
    for (std::size_t k = 0; k < key_columns; ++k) {
      double x = 0.0, y = 0.0;
      if (as_number(a[k], x) && as_number(b[k], y)) {
        if (x != y) return x < y;
      } else if (a[k] != b[k]) {
        return a[k] < b[k];
      }
    }
    return false;
  });
}

ResultsWriter::ResultsWriter(std::string dir, std::string name, Row header, std::size_t key_columns, bool resume)
    : dir_(std::move(dir)),
      partial_path_((fs::path(dir_) / (name + ".partial.csv")).string()),
      final_path_((fs::path(dir_) / (name + ".csv")).string()),
      header_(std::move(header)),
      key_columns_(key_columns) {
  fs::create_directories(dir_);
  if (resume) {
    for (const std::string& p : {final_path_, partial_path_}) {
      if (!fs::exists(p)) continue;
      const CsvTable t = read_csv_table(p, true);
      if (t.header != header_) throw ConfigError("resume: " + p + " has a different column layout");
      for (const Row& r : t.rows) {
        Row key(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(key_columns_));
        if (keys_.insert(key).second) rows_.push_back(r);
      }
    }
  }
  // Rewrite the partial file so it holds exactly the rows carried over.
  out_.open(partial_path_, std::ios::trunc);
  if (!out_) throw ConfigError("cannot write " + partial_path_);
  write_row(out_, header_);
  for (const Row& r : rows_) write_row(out_, r);
  out_.flush();
}

bool ResultsWriter::done(const Row& key) const {
  std::lock_guard lock(mutex_);
  return keys_.count(key) > 0;
}

std::size_t ResultsWriter::completed() const {
  std::lock_guard lock(mutex_);
  return rows_.size();
}

void ResultsWriter::append(const Row& row) {
  if (row.size() != header_.size()) throw Error("ResultsWriter: row width does not match the header");
  std::lock_guard lock(mutex_);
  Row key(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(key_columns_));
  if (!keys_.insert(key).second) return;
  rows_.push_back(row);
  write_row(out_, row);
  out_.flush();
}

std::string ResultsWriter::finalize() {
  std::lock_guard lock(mutex_);
  CsvTable t{header_, rows_};
  sort_rows(t.rows, key_columns_);
  write_csv_table(final_path_, t);
  out_.close();
  fs::remove(partial_path_);
  return final_path_;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

const char* code_version() { return FRACRC_VERSION; }

void write_manifest(const std::string& dir, const std::string& recipe, const Json& config, std::uint64_t seed,
                    const Json& status) {
  fs::create_directories(dir);
  const Json m{{"recipe", recipe},
               {"config", config},
               {"config_hash", config_hash(config)},
               {"seed", seed},
               {"version", code_version()},
               {"isa", simd::isa_name(simd::kernels().isa)},
               {"status", status}};
  const std::string path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(path + ".tmp", std::ios::trunc);
  out << m.dump(2) << '\n';
  out.close();
  fs::rename(path + ".tmp", path);
}

void check_resume_manifest(const std::string& dir, const Json& config, std::uint64_t seed) {
  const fs::path path = fs::path(dir) / "manifest.json";
  if (!fs::exists(path)) return;
  const Json m = read_json_file(path.string());
  if (m.value("config_hash", std::string()) != config_hash(config) || m.value("seed", seed + 1) != seed) {
    throw ConfigError("resume: " + path.string() + " was written for a different config or seed");
  }
}

}  // namespace fracrc
