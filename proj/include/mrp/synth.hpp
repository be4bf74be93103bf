// synth.hpp
// Seeded synthetic cointegrated market generator. N stationary AR(1)
// spreads and M-N random-walk components are mixed through a random
// orthogonal matrix into M log-price series; the true spread-recovery basis
// is the first N columns of the mixing matrix. Byte-identical output for a
// given seed.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/market_data.hpp"
#include "mrp/rng.hpp"

namespace mrp {

struct SynthConfig {
  int assets = 7;
  int spreads = 3;
  int periods = 2000;
  double ar_coeff = 0.7;      // |.| < 1; closer to 1 means slower reversion
  std::vector<double> ar_coeffs;  // optional per-spread override of ar_coeff
  double spread_vol = 0.02;   // AR(1) innovation std
  double walk_vol = 0.01;     // random-walk step std
  double base_log_price = 4.6;  // about log(100)
  std::uint64_t seed = 42;
};

struct SynthResult {
  AssetPanel panel;      // log prices
  MatrixXd prices;       // exp(log prices), what gets written to CSV
  MatrixXd true_basis;   // M x N spread-recovery basis
  MatrixXd true_spreads; // T x N, the generated AR(1) paths plus offsets
};

inline void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.assets < 1) throw ValidationError("assets must be >= 1");
  if (cfg.spreads < 1 || cfg.spreads > cfg.assets)
    throw ValidationError("spreads must be in [1, assets]");
  if (cfg.periods < 10) throw ValidationError("periods must be >= 10");
  if (!(std::abs(cfg.ar_coeff) < 1.0))
    throw ValidationError("AR coefficient must have magnitude < 1 for stationarity");
  if (!cfg.ar_coeffs.empty()) {
    if (cfg.ar_coeffs.size() != static_cast<std::size_t>(cfg.spreads))
      throw ValidationError("ar_coeffs must have one entry per spread");
    for (double phi : cfg.ar_coeffs)
      if (!(std::abs(phi) < 1.0))
        throw ValidationError("AR coefficient must have magnitude < 1 for stationarity");
  }
  if (!(cfg.spread_vol > 0.0 && cfg.walk_vol > 0.0))
    throw ValidationError("volatilities must be positive");
}

namespace detail {

// Next calendar day in ISO-8601, proleptic Gregorian.
inline std::string next_date(const std::string& iso) {
  int year = std::stoi(iso.substr(0, 4));
  int month = std::stoi(iso.substr(5, 2));
  int day = std::stoi(iso.substr(8, 2));
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const int month_len = (month == 2 && leap) ? 29 : lengths[month - 1];
  if (++day > month_len) {
    day = 1;
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

}  // namespace detail

inline SynthResult generate_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  Rng rng(cfg.seed);
  const int m = cfg.assets;
  const int n = cfg.spreads;
  const int t_count = cfg.periods;

  // Orthogonal mixing matrix from the QR of a random normal matrix.
  MatrixXd raw(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) raw(i, j) = rng.normal();
  const MatrixXd mixing = Eigen::HouseholderQR<MatrixXd>(raw).householderQ();

  // Latent factors: N AR(1) spreads started at their stationary scale,
  // M-N random walks.
  std::vector<double> phis(static_cast<std::size_t>(n), cfg.ar_coeff);
  if (!cfg.ar_coeffs.empty()) phis = cfg.ar_coeffs;
  MatrixXd factors(t_count, m);
  for (int j = 0; j < n; ++j) {
    const double phi = phis[static_cast<std::size_t>(j)];
    factors(0, j) = rng.normal(0.0, cfg.spread_vol / std::sqrt(1.0 - phi * phi));
  }
  for (int j = n; j < m; ++j) factors(0, j) = 0.0;
  for (int t = 1; t < t_count; ++t) {
    for (int j = 0; j < n; ++j)
      factors(t, j) = phis[static_cast<std::size_t>(j)] * factors(t - 1, j) +
                      rng.normal(0.0, cfg.spread_vol);
    for (int j = n; j < m; ++j)
      factors(t, j) = factors(t - 1, j) + rng.normal(0.0, cfg.walk_vol);
  }

  VectorXd base = VectorXd::Constant(m, cfg.base_log_price);
  for (int i = 0; i < m; ++i) base[i] += rng.uniform(-0.5, 0.5);

  SynthResult result;
  MatrixXd log_prices = (factors * mixing.transpose()).rowwise() + base.transpose();
  result.prices = log_prices.array().exp();
  result.true_basis = mixing.leftCols(n);
  result.true_spreads = log_prices * result.true_basis;

  std::vector<std::string> dates;
  dates.reserve(static_cast<std::size_t>(t_count));
  std::string date = "2015-01-01";
  for (int t = 0; t < t_count; ++t) {
    dates.push_back(date);
    date = detail::next_date(date);
  }
  std::vector<std::string> tickers;
  tickers.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%02d", i + 1);
    tickers.emplace_back(buf);
  }
  result.panel = make_panel(std::move(dates), std::move(tickers), std::move(log_prices));
  return result;
}

}  // namespace mrp
