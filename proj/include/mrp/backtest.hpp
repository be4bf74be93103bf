// backtest.hpp
// Threshold-based mean-reversion trading simulation for a designed
// portfolio. The portfolio spread z_t = w_pᵀ y_t is standardized with a
// trailing rolling mean/std; positions open when the z-score breaches
// +/- open_threshold and close when it comes back inside +/- close_threshold.
// At most one position is open at a time; a close may be followed by an
// opposite open in the same period. P&L works on log-price spread changes
// scaled by budget / ||w_p||_1, an approximation to dollar P&L.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mrp/common.hpp"
#include "mrp/criteria.hpp"
#include "mrp/market_data.hpp"

namespace mrp {

struct TradeConfig {
  double open_threshold = 1.0;   // z-score to enter, > 0
  double close_threshold = 0.0;  // z-score to exit (toward zero), in [0, open)
  int lookback = 60;             // rolling window length, >= 2
  double annualization = 252.0;  // periods per year for Sharpe scaling
};

inline void validate_trade_config(const TradeConfig& cfg) {
  if (!(cfg.open_threshold > 0.0)) throw ValidationError("open threshold must be positive");
  if (!(cfg.close_threshold >= 0.0 && cfg.close_threshold < cfg.open_threshold))
    throw ValidationError("close threshold must satisfy 0 <= close < open");
  if (cfg.lookback < 2) throw ValidationError("lookback must be >= 2");
  if (!(cfg.annualization > 0.0)) throw ValidationError("annualization must be positive");
}

enum class TradeSide : int { long_spread = 1, short_spread = -1 };

struct Trade {
  Eigen::Index entry_index = 0;
  Eigen::Index exit_index = 0;
  TradeSide side = TradeSide::long_spread;
  double entry_value = 0.0;  // spread at entry
  double exit_value = 0.0;   // spread at exit
  double pnl = 0.0;
};

struct SharpeResult {
  double value = 0.0;
  bool degenerate = false;  // per-period return std below 1e-15
};

// Annualized mean-over-std of per-period returns; degenerate (flagged, value
// zero) when the return series has no variation.
inline SharpeResult sharpe_ratio(const std::vector<double>& returns, double annualization) {
  if (returns.size() < 2)
    throw ValidationError("sharpe ratio needs at least 2 observations");
  if (!(annualization > 0.0)) throw ValidationError("annualization must be positive");
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(returns.size());
  double ssq = 0.0;
  for (double r : returns) ssq += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(ssq / static_cast<double>(returns.size() - 1));
  if (std_dev < 1e-15) return {0.0, true};
  return {mean / std_dev * std::sqrt(annualization), false};
}

struct BacktestReport {
  std::vector<Trade> trades;           // closed trades, in order
  std::vector<double> cumulative_pnl;  // per period (realized + mark)
  std::vector<int> positions;          // -1 short, 0 flat, +1 long, per period
  double open_mark = 0.0;              // unrealized P&L of a position still open at the end
  double roi = 0.0;                    // final cumulative P&L / leverage budget
  SharpeResult sharpe;
  int num_trades = 0;
  int skipped_periods = 0;  // periods with degenerate rolling std (no decision)
};

inline BacktestReport run_backtest(const PortfolioWeights& weights, const AssetPanel& panel,
                                   const SpreadBasis& basis, const TradeConfig& cfg) {
  validate_trade_config(cfg);
  if (basis.assets() != panel.assets())
    throw ValidationError("basis rows do not match panel assets");
  if (weights.w.size() != basis.spreads())
    throw ValidationError("weight length does not match basis spread count");
  if (!weights.w.allFinite()) throw ValidationError("non-finite weights");
  const Eigen::Index t_count = panel.periods();
  if (t_count <= cfg.lookback)
    throw ValidationError("panel too short for lookback " + std::to_string(cfg.lookback));

  const VectorXd asset_weights = basis.basis * weights.w;
  const double gross = asset_weights.lpNorm<1>();
  if (!(gross > 0.0)) throw ValidationError("weights map to zero asset exposure");
  const double scale = basis.leverage_budget / gross;

  const VectorXd spread = panel.log_prices * asset_weights;

  BacktestReport report;
  report.cumulative_pnl.assign(static_cast<std::size_t>(t_count), 0.0);
  report.positions.assign(static_cast<std::size_t>(t_count), 0);

  int side = 0;  // +1 long, -1 short, 0 flat
  Eigen::Index entry_index = 0;
  double entry_value = 0.0;
  double realized = 0.0;

  // Trailing window [t - lookback + 1, t]. The variance is computed in
  // centered form so a constant window reads as exactly degenerate instead
  // of as cancellation noise.
  const int window = cfg.lookback;
  double win_sum = 0.0;
  for (Eigen::Index t = 0; t < t_count; ++t) {
    win_sum += spread[t];
    if (t >= window) win_sum -= spread[t - window];

    if (t >= window - 1) {
      const double mean = win_sum / window;
      double ssq = 0.0;
      for (Eigen::Index i = t - window + 1; i <= t; ++i)
        ssq += (spread[i] - mean) * (spread[i] - mean);
      const double std_dev = std::sqrt(ssq / (window - 1));
      if (std_dev < 1e-14 * (1.0 + std::abs(mean))) {
        ++report.skipped_periods;
      } else {
        const double score = (spread[t] - mean) / std_dev;
        if (side == -1 && score <= cfg.close_threshold) {
          const double pnl = -1.0 * (spread[t] - entry_value) * scale;
          report.trades.push_back({entry_index, t, TradeSide::short_spread, entry_value,
                                   spread[t], pnl});
          realized += pnl;
          side = 0;
        } else if (side == 1 && score >= -cfg.close_threshold) {
          const double pnl = (spread[t] - entry_value) * scale;
          report.trades.push_back({entry_index, t, TradeSide::long_spread, entry_value,
                                   spread[t], pnl});
          realized += pnl;
          side = 0;
        }
        if (side == 0) {
          if (score >= cfg.open_threshold) {
            side = -1;
            entry_index = t;
            entry_value = spread[t];
          } else if (score <= -cfg.open_threshold) {
            side = 1;
            entry_index = t;
            entry_value = spread[t];
          }
        }
      }
    }

    report.positions[static_cast<std::size_t>(t)] = side;
    const double mark = side != 0 ? side * (spread[t] - entry_value) * scale : 0.0;
    report.cumulative_pnl[static_cast<std::size_t>(t)] = realized + mark;
  }

  report.open_mark =
      side != 0 ? side * (spread[t_count - 1] - entry_value) * scale : 0.0;
  report.num_trades = static_cast<int>(report.trades.size());
  report.roi = report.cumulative_pnl.back() / basis.leverage_budget;

  std::vector<double> period_returns;
  period_returns.reserve(static_cast<std::size_t>(t_count - window));
  for (Eigen::Index t = window; t < t_count; ++t)
    period_returns.push_back((report.cumulative_pnl[static_cast<std::size_t>(t)] -
                              report.cumulative_pnl[static_cast<std::size_t>(t - 1)]) /
                             basis.leverage_budget);
  if (period_returns.size() >= 2)
    report.sharpe = sharpe_ratio(period_returns, cfg.annualization);
  else
    report.sharpe = {0.0, true};
  return report;
}

}  // namespace mrp
