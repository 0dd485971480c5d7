#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fracrc {

/// Uniformly sampled multivariate time series, rows = time steps, columns =
/// coordinates, stored row-major. All entries are finite. An empty (zero-row)
/// trajectory is allowed; it is what a zero-length prediction returns.
class Trajectory {
 public:
  Trajectory() = default;

  /// Throws NumericalError if any entry is non-finite, ConfigError on shape errors.
  Trajectory(std::vector<double> data, std::size_t dim, double dt, std::size_t transient_discarded = 0);

  static Trajectory empty(std::size_t dim, double dt);

  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  double dt() const { return dt_; }
  std::size_t transient_discarded() const { return transient_discarded_; }
  bool empty() const { return data_.empty(); }

  double operator()(std::size_t t, std::size_t c) const { return data_[t * dim_ + c]; }
  std::span<const double> row(std::size_t t) const { return {data_.data() + t * dim_, dim_}; }
  std::span<const double> values() const { return data_; }

  std::vector<double> column(std::size_t c) const;

  /// Rows [begin, begin + count).
  Trajectory slice(std::size_t begin, std::size_t count) const;

  /// Keep only the listed columns, in the given order.
  Trajectory select_columns(std::span<const std::size_t> columns) const;

  /// Replace one coordinate; values must be finite and of matching length.
  void set_column(std::size_t c, std::span<const double> values);

  friend bool operator==(const Trajectory& a, const Trajectory& b) = default;

 private:
  std::vector<double> data_;
  std::size_t dim_ = 0;
  double dt_ = 0.0;
  std::size_t transient_discarded_ = 0;
};

/// Drop the first n rows; the discarded count accumulates. Throws if n >= size().
Trajectory discard_transient(const Trajectory& traj, std::size_t n);

/// Per-coordinate sample standard deviation (population normalization).
std::vector<double> column_std(const Trajectory& traj);

/// CSV with header `t,x1,...,xD`, time column k*dt, shortest round-trip doubles.
void write_csv(std::ostream& os, const Trajectory& traj);
void write_csv(const std::string& path, const Trajectory& traj);

/// Reads the format written by write_csv; dt is recovered from the time column.
Trajectory read_trajectory_csv(const std::string& path);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

/// Strict parse of a full field; throws ConfigError on failure.
double parse_double(const std::string& field);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace fracrc
