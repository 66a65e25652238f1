#include "mevo/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mevo/errors.hpp"

namespace mevo {

std::string to_string(TrajKind k) {
  switch (k) {
    case TrajKind::Predicted: return "predicted";
    case TrajKind::OptimalProjection: return "optimal-projection";
    case TrajKind::Galerkin: return "galerkin";
    case TrajKind::ExactModal: return "exact-modal";
  }
  return "?";
}

void Trajectory::validate() const {
  if (!basis) throw ConfigError("trajectory has no basis");
  if (v.empty()) throw ConfigError("trajectory has no entries");
  if (!(delta > 0.0)) throw ConfigError("trajectory time lag must be positive");
  for (std::size_t k = 0; k < v.size(); ++k)
    if (v[k].size() != basis->n())
      throw ConfigError("trajectory entry " + std::to_string(k) + " has length " +
                        std::to_string(v[k].size()) + ", basis n = " +
                        std::to_string(basis->n()));
  if (!eps_proj.empty() && eps_proj.size() != v.size())
    throw ConfigError("trajectory eps_proj series length mismatch");
  if (!field_norms.empty() && field_norms.size() != v.size())
    throw ConfigError("trajectory field norm series length mismatch");
}

void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
  traj.validate();
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write trajectory CSV: " + path);
  out << "t";
  for (int j = 1; j <= traj.basis->n(); ++j) out << ",v_" << j;
  out << "\n";
  char buf[32];
  for (std::size_t k = 0; k < traj.v.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", traj.time(int(k)));
    out << buf;
    for (int j = 0; j < traj.basis->n(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", traj.v[k](j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

Trajectory load_trajectory_csv(const std::string& path, const BasisPtr& basis) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open trajectory CSV: " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty trajectory CSV: " + path);
  {
    std::ostringstream expect;
    expect << "t";
    for (int j = 1; j <= basis->n(); ++j) expect << ",v_" << j;
    if (header != expect.str())
      throw FormatError("trajectory CSV header mismatch in " + path + ": expected \"" +
                        expect.str() + "\", got \"" + header + "\"");
  }
  Trajectory traj;
  traj.basis = basis;
  std::string line;
  int lineno = 1;
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    auto next = [&]() {
      if (!std::getline(ss, cell, ','))
        throw FormatError("short row at " + path + ":" + std::to_string(lineno));
      try {
        return std::stod(cell);
      } catch (const std::exception&) {
        throw FormatError("bad number '" + cell + "' at " + path + ":" +
                          std::to_string(lineno));
      }
    };
    times.push_back(next());
    Eigen::VectorXd row(basis->n());
    for (int j = 0; j < basis->n(); ++j) row(j) = next();
    traj.v.push_back(std::move(row));
  }
  if (traj.v.size() < 2)
    throw FormatError("trajectory CSV needs at least two rows: " + path);
  traj.delta = times[1] - times[0];
  if (!(traj.delta > 0))
    throw FormatError("trajectory CSV times must increase: " + path);
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - traj.delta * double(k)) > 1e-9 * std::max(1.0, times.back()))
      throw FormatError("trajectory CSV times are not uniformly spaced at row " +
                        std::to_string(k) + " in " + path);
  traj.validate();
  return traj;
}

}  // namespace mevo
