#include "svfb/export.hpp"

#include "svfb/kinematics.hpp"

#include <Eigen/Core>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace svfb {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::vector<std::size_t> export_schedule(std::size_t count, int every) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  const std::size_t step = every > 0 ? static_cast<std::size_t>(every) : 1;
  for (std::size_t k = 0; k < count; k += step) out.push_back(k);
  if (out.back() != count - 1) out.push_back(count - 1);
  return out;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string row(std::initializer_list<double> values) {
  std::string s;
  bool first = true;
  for (double v : values) {
    if (!first) s += ',';
    s += format_double(v);
    first = false;
  }
  return s;
}

std::string index_name(const char* stem, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.csv", stem, k);
  return buf;
}

}  // namespace

void write_csv(const fs::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
  auto out = open_out(path);
  out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  finish(out, path);
}

std::vector<fs::path> export_run(const RunArtifacts& run, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;

  const bool have_solution = run.solution && run.solution->size() > 1 && run.weight;
  if (have_solution) {
    const Solution& sol = *run.solution;
    const Grid& g = run.weight->grid;

    if (!run.energy.empty()) {
      std::vector<std::string> rows;
      for (std::size_t n = 0; n < run.energy.size(); ++n) {
        const EnergyReport& e = run.energy[n];
        const BoundsReport& b = sol.bounds[n];
        rows.push_back(row({e.t, e.total, e.tangential, e.elliptic, b.j_min, b.j_max,
                            b.b_min_eig, e.boundary_residual}));
      }
      written.push_back(dir / "energy.csv");
      write_csv(written.back(), "t,E_total,E_en,E_el,J_min,J_max,b_min_eig,boundary_residual",
                rows);
    }

    for (std::size_t k = 0; k < run.export_indices.size(); ++k) {
      const std::size_t idx = run.export_indices[k];
      const FlowMapState& s = sol.states[idx];
      const VectorField pos = s.positions(g);
      const Field jac = deformation(s, g).jacobian;
      std::vector<std::string> rows;
      rows.reserve(g.size());
      for (int j = 0; j < g.n2; ++j) {
        for (int i = 0; i < g.n1; ++i) {
          rows.push_back(row({g.x1(i), g.x2(j), pos[0](i, j), pos[1](i, j), s.velocity[0](i, j),
                              s.velocity[1](i, j), jac(i, j),
                              run.weight->values(i, j) / jac(i, j)}));
        }
      }
      written.push_back(dir / index_name("state", idx));
      write_csv(written.back(), "x1,x2,eta1,eta2,v1,v2,J,rho", rows);

      if (k < run.snapshots.size()) {
        const EulerianSnapshot& snap = run.snapshots[k];
        rows.clear();
        for (std::size_t q = 0; q < snap.query.size(); ++q) {
          rows.push_back(row({snap.query[q].x(), snap.query[q].y(), snap.rho[q], snap.u[q].x(),
                              snap.u[q].y()}));
        }
        written.push_back(dir / index_name("eulerian", idx));
        write_csv(written.back(), "y1,y2,rho,u1,u2", rows);

        rows.clear();
        for (int c = 0; c < 2; ++c) {
          const BoundaryCurve& curve = snap.boundary[c];
          for (std::size_t p = 0; p < curve.points.size(); ++p) {
            rows.push_back(std::to_string(c) + ',' + std::to_string(p) + ',' +
                           row({curve.points[p].x(), curve.points[p].y(), curve.normals[p].x(),
                                curve.normals[p].y()}));
          }
        }
        written.push_back(dir / index_name("boundary", idx));
        write_csv(written.back(), "component,k,y1,y2,n1,n2", rows);
      }
    }
  }

  if (run.trace && !run.trace->iterations.empty()) {
    std::vector<std::string> rows;
    for (const auto& it : run.trace->iterations) {
      rows.push_back(std::to_string(it.iteration) + ',' +
                     row({it.d, it.e, it.ratio, it.T}) + ',' + std::to_string(it.attempt) +
                     ',' + format_double(it.interpolation));
    }
    written.push_back(dir / "picard.csv");
    write_csv(written.back(), "iter,d_n,e_n,ratio,T,attempt,interpolation", rows);
  }

  // Manifest: config echo, summary, checks, versions.
  const fs::path manifest = dir / "manifest.txt";
  auto out = open_out(manifest);
  out << "[config]\n";
  if (run.config) {
    out << run.config->raw;
    if (!run.config->raw.empty() && run.config->raw.back() != '\n') out << '\n';
  }
  out << "[/config]\n\n[summary]\n";
  for (const auto& [k, v] : run.summary) out << k << " = " << v << '\n';
  if (run.trace) {
    out << "converged = " << (run.trace->converged ? "true" : "false") << '\n';
    out << "picard_iterations = " << run.trace->iteration_count() << '\n';
    out << "t_halvings = " << run.trace->halvings.size() << '\n';
    for (const auto& h : run.trace->halvings) {
      out << "halving = attempt " << h.attempt << ", iteration " << h.iteration << ", T "
          << format_double(h.T_before) << ", " << h.reason << '\n';
    }
    if (!run.trace->failure.empty()) out << "failure = " << run.trace->failure << '\n';
  }
  out << "\n[checks]\n";
  for (const auto& [k, ok] : run.checks) out << k << " = " << (ok ? "pass" : "fail") << '\n';
  out << "\n[versions]\n";
  out << "svfb = 0.1.0\n";
  out << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << '\n';
  out << "compiler = " << __VERSION__ << '\n';
  if (run.config && run.config->timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "timestamp = " << buf << '\n';
  }
  finish(out, manifest);
  written.push_back(manifest);
  return written;
}

}  // namespace svfb
