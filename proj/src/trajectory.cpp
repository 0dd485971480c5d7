#include "fracrc/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fracrc/core.hpp"

namespace fracrc {

Trajectory::Trajectory(std::vector<double> data, std::size_t dim, double dt, std::size_t transient_discarded)
    : data_(std::move(data)), dim_(dim), dt_(dt), transient_discarded_(transient_discarded) {
  if (dim_ == 0) throw ConfigError("Trajectory: dimension must be >= 1");
  if (data_.size() % dim_ != 0) throw ConfigError("Trajectory: data size is not a multiple of the dimension");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ConfigError("Trajectory: dt must be positive and finite");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NumericalError("Trajectory: non-finite entry at step " + std::to_string(i / dim_));
    }
  }
}

Trajectory Trajectory::empty(std::size_t dim, double dt) { return Trajectory({}, dim, dt); }

std::vector<double> Trajectory::column(std::size_t c) const {
  std::vector<double> out(size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = data_[t * dim_ + c];
  return out;
}

Trajectory Trajectory::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > size()) throw ConfigError("Trajectory::slice: range exceeds trajectory length");
  Trajectory out;
  out.data_.assign(data_.begin() + static_cast<std::ptrdiff_t>(begin * dim_),
                   data_.begin() + static_cast<std::ptrdiff_t>((begin + count) * dim_));
  out.dim_ = dim_;
  out.dt_ = dt_;
  out.transient_discarded_ = transient_discarded_ + begin;
  return out;
}

Trajectory Trajectory::select_columns(std::span<const std::size_t> columns) const {
  if (columns.empty()) throw ConfigError("Trajectory::select_columns: no columns selected");
  std::vector<double> out;
  out.reserve(size() * columns.size());
  for (std::size_t t = 0; t < size(); ++t) {
    for (std::size_t c : columns) {
      if (c >= dim_) throw ConfigError("Trajectory::select_columns: column out of range");
      out.push_back(data_[t * dim_ + c]);
    }
  }
  return Trajectory(std::move(out), columns.size(), dt_, transient_discarded_);
}

void Trajectory::set_column(std::size_t c, std::span<const double> values) {
  if (c >= dim_ || values.size() != size()) throw ConfigError("Trajectory::set_column: shape mismatch");
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t])) throw NumericalError("Trajectory::set_column: non-finite value");
    data_[t * dim_ + c] = values[t];
  }
}

Trajectory discard_transient(const Trajectory& traj, std::size_t n) {
  if (n >= traj.size()) {
    throw ConfigError("discard_transient: cannot discard " + std::to_string(n) + " of " +
                      std::to_string(traj.size()) + " steps");
  }
  return traj.slice(n, traj.size() - n);
}

std::vector<double> column_std(const Trajectory& traj) {
  const std::size_t n = traj.size();
  std::vector<double> out(traj.dim(), 0.0);
  if (n == 0) return out;
  for (std::size_t c = 0; c < traj.dim(); ++c) {
    double mean = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += traj(t, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double d = traj(t, c) - mean;
      ss += d * d;
    }
    out[c] = std::sqrt(ss / static_cast<double>(n));
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field) {
  std::size_t b = 0;
  std::size_t e = field.size();
  while (b < e && std::isspace(static_cast<unsigned char>(field[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(field[e - 1]))) --e;
  if (b == e) throw ConfigError("empty numeric field");
  if (field[b] == '+') ++b;
  double v = 0.0;
  auto res = std::from_chars(field.data() + b, field.data() + e, v);
  if (res.ec != std::errc() || res.ptr != field.data() + e) {
    throw ConfigError("cannot parse number '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (std::size_t c = 0; c < traj.dim(); ++c) os << ",x" << (c + 1);
  os << '\n';
  for (std::size_t t = 0; t < traj.size(); ++t) {
    os << format_double(static_cast<double>(t) * traj.dt());
    for (std::size_t c = 0; c < traj.dim(); ++c) os << ',' << format_double(traj(t, c));
    os << '\n';
  }
}

void write_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_csv(os, traj);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("'" + path + "' is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t") throw ConfigError("'" + path + "': expected header t,x1,...");
  const std::size_t dim = header.size() - 1;
  std::vector<double> data;
  std::vector<double> times;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw ConfigError("'" + path + "': ragged row");
    times.push_back(parse_double(fields[0]));
    for (std::size_t c = 1; c < fields.size(); ++c) data.push_back(parse_double(fields[c]));
  }
  if (times.size() < 2) throw ConfigError("'" + path + "': need at least two rows to recover dt");
  const double dt = times[1] - times[0];
  return Trajectory(std::move(data), dim, dt);
}

}  // namespace fracrc
