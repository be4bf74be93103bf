// sweep.hpp
// Trade-off sweep: one full design solve per mu on a shared criterion and
// moment set. Rows run concurrently up to a worker cap; each row is
// independent and deterministic, and a row failure is recorded in that row
// without aborting the rest.

#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/sca_solver.hpp"

namespace mrp {

struct SweepRow {
  double mu = 0.0;
  bool ok = false;
  std::string error;
  double u = 0.0;         // U(w*)
  double variance = 0.0;  // w*ᵀM₀w*
  double l1_norm = 0.0;   // ||B w*||_1
  int iterations = 0;
  SolveReport report;
};

inline std::vector<SweepRow> run_sweep(const CriterionSpec& spec, const LaggedMoments& moments,
                                       const SpreadBasis& basis, const std::vector<double>& mu_grid,
                                       double tau, const StepRule& step, const AdmmConfig& inner,
                                       unsigned workers = 0,
                                       const SolverOptions& options = {}) {
  if (mu_grid.empty()) throw ValidationError("mu grid must not be empty");
  for (double mu : mu_grid)
    if (!(mu >= 0.0)) throw ValidationError("mu grid entries must be nonnegative");

  std::vector<SweepRow> rows(mu_grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= mu_grid.size()) return;
      SweepRow& row = rows[idx];
      row.mu = mu_grid[idx];
      try {
        row.report = design_mrp(spec, moments, basis, row.mu, tau, step, inner, std::nullopt,
                                options);
        row.u = row.report.objective.u;
        row.variance = 1.0 / row.report.objective.v;
        row.l1_norm = row.report.weights.w_p.lpNorm<1>();
        row.iterations = row.report.outer_iters;
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };

  unsigned thread_count = workers > 0 ? workers : std::thread::hardware_concurrency();
  if (thread_count == 0) thread_count = 1;
  thread_count = std::min<unsigned>(thread_count, static_cast<unsigned>(mu_grid.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

inline std::string tradeoff_csv(const std::vector<SweepRow>& rows) {
  std::string out = "mu,u,variance,l1_norm,iterations,status\n";
  char buf[160];
  for (const auto& row : rows) {
    if (row.ok) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d,ok\n", row.mu, row.u,
                    row.variance, row.l1_norm, row.iterations);
      out += buf;
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g,,,,,failed\n", row.mu);
      out += buf;
    }
  }
  return out;
}

inline std::vector<SweepRow> read_tradeoff_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      detail::trim(line) != "mu,u,variance,l1_norm,iterations,status")
    throw IoError(path + ": bad tradeoff header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 6) throw IoError(path + ": bad tradeoff row");
    SweepRow row;
    row.mu = std::stod(cells[0]);
    row.ok = cells[5] == "ok";
    if (row.ok) {
      row.u = std::stod(cells[1]);
      row.variance = std::stod(cells[2]);
      row.l1_norm = std::stod(cells[3]);
      row.iterations = std::stoi(cells[4]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mrp
