#include "abfrac/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace abfrac {

Trajectory sample_signal(double t0, double dt, Eigen::Index n,
                         const std::function<Eigen::VectorXd(double)>& f) {
  if (n < 1) throw std::invalid_argument("sample_signal: n < 1");
  Eigen::VectorXd first = f(t0);
  Trajectory out;
  out.t0 = t0;
  out.dt = dt;
  out.samples.resize(n, first.size());
  out.samples.row(0) = first.transpose();
  for (Eigen::Index k = 1; k < n; ++k) {
    out.samples.row(k) = f(t0 + static_cast<double>(k) * dt).transpose();
  }
  return out;
}

Trajectory sample_scalar(double t0, double dt, Eigen::Index n,
                         const std::function<double(double)>& f) {
  return sample_signal(t0, dt, n, [&](double t) {
    return Eigen::VectorXd::Constant(1, f(t));
  });
}

Trajectory norm_trajectory(const Trajectory& x) {
  Trajectory out;
  out.t0 = x.t0;
  out.dt = x.dt;
  out.samples = x.samples.rowwise().norm();
  return out;
}

Trajectory decimate(const Trajectory& x, Eigen::Index stride) {
  if (stride < 1) throw std::invalid_argument("decimate: stride < 1");
  const Eigen::Index n = (x.size() + stride - 1) / stride;
  Trajectory out;
  out.t0 = x.t0;
  out.dt = x.dt * static_cast<double>(stride);
  out.samples.resize(n, x.dim());
  for (Eigen::Index k = 0; k < n; ++k) out.samples.row(k) = x.samples.row(k * stride);
  return out;
}

void write_csv(const std::string& path, const Trajectory& x) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "t";
  for (Eigen::Index j = 0; j < x.dim(); ++j) os << ",x" << (j + 1);
  os << "\n";
  char buf[32];
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", x.time(k));
    os << buf;
    for (Eigen::Index j = 0; j < x.dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x.samples(k, j));
      os << ',' << buf;
    }
    os << "\n";
  }
}

Trajectory read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty csv: " + path);
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ls, cell, ',')) {
      const double v = std::stod(cell);
      if (first) {
        times.push_back(v);
        first = false;
      } else {
        row.push_back(v);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error("csv has fewer than 2 samples: " + path);
  Trajectory out;
  out.t0 = times.front();
  out.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  out.samples.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != rows.front().size()) {
      throw std::runtime_error("ragged csv row in " + path);
    }
    for (std::size_t j = 0; j < rows[k].size(); ++j) {
      out.samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][j];
    }
  }
  return out;
}

}  // namespace abfrac
