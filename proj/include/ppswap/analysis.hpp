#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ppswap/game.hpp"
#include "ppswap/solver.hpp"

namespace ppswap {

// Closed-form incentive thresholds for the two-packet game, plus numeric
// threshold location and a sweep harness that cross-checks the closed forms
// against the solver point by point.

// Closed forms, two-packet game only:
//   honest Bob requires    mu_a    > 2 p0 / (4 alpha_b + p0 - delta)
//   honest Alice requires  alpha_a > (p0 + 2 delta) / 4
//                     and  mu_b    > p0 / (4 alpha_a + p0)
//   malicious agents continue everywhere iff
//       collateral_bob  > (p0 + delta) / 2
//   and collateral_alice > (p0 + 2 delta) / 2.
// A mu threshold above 1 means no prior makes that agent willingly honest.
template <class T>
struct ThresholdSet {
  T bob_mu_min{};
  T alice_alpha_min{};
  T alice_mu_min{};
  T collateral_bob_min{};
  T collateral_alice_min{};
  bool bob_mu_unsatisfiable = false;
  bool alice_mu_unsatisfiable = false;
};

template <class T>
ThresholdSet<T> thresholds(const T& p0, const T& delta, const T& alpha_alice,
                           const T& alpha_bob) {
  if (!(p0 > T(0))) throw std::invalid_argument("thresholds: p0 must be positive");
  if (delta < T(0) || T(2) * delta > p0)
    throw std::invalid_argument("thresholds: delta must lie in [0, p0/2]");
  if (alpha_alice < T(0) || alpha_bob < T(0))
    throw std::invalid_argument("thresholds: alpha must be non-negative");
  ThresholdSet<T> out;
  out.bob_mu_min = T(2) * p0 / (T(4) * alpha_bob + p0 - delta);
  out.alice_alpha_min = (p0 + T(2) * delta) / T(4);
  out.alice_mu_min = p0 / (T(4) * alpha_alice + p0);
  out.collateral_bob_min = (p0 + delta) / T(2);
  out.collateral_alice_min = (p0 + T(2) * delta) / T(2);
  out.bob_mu_unsatisfiable = out.bob_mu_min > T(1);
  out.alice_mu_unsatisfiable = out.alice_mu_min > T(1);
  return out;
}

// Fraction of transactions that fail when players follow their solved
// strategies: only an honest-honest match completes.
template <class T>
struct FailureRate {
  T value{};
  // The formula presumes the regime in which malicious types always stop:
  // collateral below the sufficiency minima (honest types continue by
  // definition, willing or not).
  static constexpr std::string_view assumes =
      "collateral below the continue-everywhere minima; honest types always continue";
};

template <class T>
FailureRate<T> failure_probability(const Population<T>& population) {
  population.validate();
  return {T(1) - population.mu_alice * population.mu_bob};
}

// Smallest parameter value at which a monotone predicate turns true,
// located by bisection to a relative tolerance. Returns nullopt when the
// predicate is constant over [lo, hi].
inline std::optional<double> bisect_threshold(double lo, double hi, double rel_tol,
                                              const std::function<bool(double)>& pred) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: empty interval");
  if (pred(lo)) return lo;
  if (!pred(hi)) return std::nullopt;
  for (int i = 0; i < 200 && hi - lo > rel_tol * std::max(std::abs(hi), 1e-300); ++i) {
    const double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline std::optional<double> locate_spec_threshold(GameSpec<double> spec, double lo, double hi,
                                                   double rel_tol,
                                                   const std::function<void(GameSpec<double>&, double)>& set,
                                                   const std::function<bool(const SolveReport<double>&)>& pass) {
  return bisect_threshold(lo, hi, rel_tol, [&](double x) {
    GameSpec<double> s = spec;
    set(s, x);
    return pass(solve(s));
  });
}

}  // namespace detail

// Numerically located flip points, for any packet count. Each threshold is
// conditional on the rest of the spec being held fixed; a nullopt means the
// verdict does not flip over the searched range. Monotonicity of the
// underlying verdicts in the varied parameter is assumed.
struct NumericThresholds {
  std::optional<double> bob_mu_min;         // willing Bob over mu_alice
  std::optional<double> alice_mu_min;       // willing Alice over mu_bob
  std::optional<double> alice_alpha_min;    // willing Alice over alpha_alice
  std::optional<double> bob_alpha_min;      // willing Bob over alpha_bob
  std::optional<double> collateral_bob_min;    // continue-everywhere over collateral_bob
  std::optional<double> collateral_alice_min;  // continue-everywhere over collateral_alice
};

inline std::optional<double> locate_bob_mu_threshold(const GameSpec<double>& spec,
                                                     double rel_tol = 1e-9) {
  return detail::locate_spec_threshold(
      spec, 0.0, 1.0, rel_tol, [](GameSpec<double>& s, double x) { s.population.mu_alice = x; },
      [](const SolveReport<double>& r) { return r.willing_bob; });
}

inline std::optional<double> locate_alice_mu_threshold(const GameSpec<double>& spec,
                                                       double rel_tol = 1e-9) {
  return detail::locate_spec_threshold(
      spec, 0.0, 1.0, rel_tol, [](GameSpec<double>& s, double x) { s.population.mu_bob = x; },
      [](const SolveReport<double>& r) { return r.willing_alice; });
}

inline std::optional<double> locate_alice_alpha_threshold(const GameSpec<double>& spec,
                                                          double rel_tol = 1e-9) {
  const double hi = 100.0 * std::max(spec.market.p0, 1.0);
  return detail::locate_spec_threshold(
      spec, 0.0, hi, rel_tol,
      [](GameSpec<double>& s, double x) { s.preferences.alpha_alice = x; },
      [](const SolveReport<double>& r) { return r.willing_alice; });
}

inline std::optional<double> locate_bob_alpha_threshold(const GameSpec<double>& spec,
                                                        double rel_tol = 1e-9) {
  const double hi = 100.0 * std::max(spec.market.p0, 1.0);
  return detail::locate_spec_threshold(
      spec, 0.0, hi, rel_tol, [](GameSpec<double>& s, double x) { s.preferences.alpha_bob = x; },
      [](const SolveReport<double>& r) { return r.willing_bob; });
}

// One side's sufficiency threshold is defined with the counterparty fully
// collateralized; otherwise the counterparty's own stops mask the flip.
inline std::optional<double> locate_collateral_threshold(GameSpec<double> spec, AgentId which,
                                                         double rel_tol = 1e-9) {
  const double hi = 4.0 * (spec.market.p0 + spec.n_packets * spec.market.delta);
  double& other = which == AgentId::Alice ? spec.collateral_bob : spec.collateral_alice;
  other = std::max(other, hi);
  return detail::locate_spec_threshold(
      spec, 0.0, hi, rel_tol,
      [which](GameSpec<double>& s, double x) {
        (which == AgentId::Alice ? s.collateral_alice : s.collateral_bob) = x;
      },
      [](const SolveReport<double>& r) { return r.strategy.malicious_continues_everywhere(); });
}

inline NumericThresholds numeric_thresholds(const GameSpec<double>& spec,
                                            double rel_tol = 1e-9) {
  NumericThresholds out;
  out.bob_mu_min = locate_bob_mu_threshold(spec, rel_tol);
  out.alice_mu_min = locate_alice_mu_threshold(spec, rel_tol);
  out.alice_alpha_min = locate_alice_alpha_threshold(spec, rel_tol);
  out.bob_alpha_min = locate_bob_alpha_threshold(spec, rel_tol);
  out.collateral_bob_min = locate_collateral_threshold(spec, AgentId::Bob, rel_tol);
  out.collateral_alice_min = locate_collateral_threshold(spec, AgentId::Alice, rel_tol);
  return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps.

enum class SweepParam {
  P0,
  Delta,
  AlphaAlice,
  AlphaBob,
  MuAlice,
  MuBob,
  CollateralAlice,
  CollateralBob,
  NPackets,
};

inline const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::P0: return "p0";
    case SweepParam::Delta: return "delta";
    case SweepParam::AlphaAlice: return "alpha_a";
    case SweepParam::AlphaBob: return "alpha_b";
    case SweepParam::MuAlice: return "mu_a";
    case SweepParam::MuBob: return "mu_b";
    case SweepParam::CollateralAlice: return "collateral_a";
    case SweepParam::CollateralBob: return "collateral_b";
    case SweepParam::NPackets: return "n_packets";
  }
  return "?";
}

// One grid axis: `steps` evenly spaced points from `from` to `to` inclusive
// (a single point when steps == 1).
struct SweepAxis {
  SweepParam param = SweepParam::MuAlice;
  double from = 0.0;
  double to = 0.0;
  int steps = 1;

  void validate() const {
    if (steps < 1) throw std::invalid_argument("sweep: axis needs at least one step");
  }
  double value(int i) const {
    return steps == 1 ? from : from + (to - from) * double(i) / double(steps - 1);
  }
  double spacing() const { return steps == 1 ? 0.0 : std::abs(to - from) / double(steps - 1); }
};

struct SweepRow {
  std::vector<double> axis_values;  // grid order, one per axis
  bool skipped = false;
  std::string diagnostic;

  bool solver_willing_alice = false;
  bool solver_willing_bob = false;
  bool solver_continue_everywhere = false;
  int solver_stop_nodes = 0;

  bool cf_available = false;           // closed forms exist (two packets)
  bool cf_honesty_applicable = false;  // honesty closed forms assume zero collateral
  bool cf_willing_alice = false;
  bool cf_willing_bob = false;
  bool cf_collateral_sufficient = false;
  bool bob_mu_unsatisfiable = false;
  bool alice_mu_unsatisfiable = false;

  bool agree = true;
  bool on_boundary = false;     // within kBoundaryRelTol of a threshold
  bool near_threshold = false;  // within one grid step of a threshold
};

struct SweepSummary {
  std::size_t points = 0;
  std::size_t skipped = 0;
  std::size_t compared = 0;
  std::size_t interior_disagreements = 0;
  std::size_t boundary_points = 0;
  std::size_t near_threshold_points = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  SweepSummary summary;
};

// Strict-inequality verdicts are indistinguishable from the closed forms
// only away from the threshold itself; grid points this close (relative)
// are excluded from the agreement count.
inline constexpr double kBoundaryRelTol = 1e-9;

namespace detail {

inline void apply_sweep_value(GameSpec<double>& spec, SweepParam p, double v) {
  switch (p) {
    case SweepParam::P0: spec.market.p0 = v; return;
    case SweepParam::Delta: spec.market.delta = v; return;
    case SweepParam::AlphaAlice: spec.preferences.alpha_alice = v; return;
    case SweepParam::AlphaBob: spec.preferences.alpha_bob = v; return;
    case SweepParam::MuAlice: spec.population.mu_alice = v; return;
    case SweepParam::MuBob: spec.population.mu_bob = v; return;
    case SweepParam::CollateralAlice: spec.collateral_alice = v; return;
    case SweepParam::CollateralBob: spec.collateral_bob = v; return;
    case SweepParam::NPackets: {
      const double r = std::round(v);
      if (std::abs(v - r) > 1e-9 || r < 1.0)
        throw std::invalid_argument("sweep: n_packets values must be positive integers");
      spec.n_packets = int(r);
      spec.market.horizon = int(r);
      return;
    }
  }
}

}  // namespace detail

// Run the solver on every grid point and compare its verdicts with the
// closed forms where they apply. Invalid points are kept as skipped rows
// with a diagnostic. Points may be evaluated on several workers; rows are
// written by grid index, so the output order is the row-major grid order
// (last axis fastest) regardless of scheduling.
inline SweepResult sweep(const GameSpec<double>& base, const std::vector<SweepAxis>& axes,
                         unsigned workers = 1) {
  for (const SweepAxis& a : axes) a.validate();
  if (workers < 1) throw std::invalid_argument("sweep: workers must be at least 1");
  std::size_t points = 1;
  for (const SweepAxis& a : axes) points *= std::size_t(a.steps);

  SweepResult result;
  result.rows.resize(points);
  auto evaluate_row = [&](std::size_t row_i) {
    SweepRow& row = result.rows[row_i];
    row.axis_values.resize(axes.size());
    // Decode the mixed-radix grid index, last axis fastest.
    std::size_t rest = row_i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      row.axis_values[a] = axes[a].value(int(rest % std::size_t(axes[a].steps)));
      rest /= std::size_t(axes[a].steps);
    }
    GameSpec<double> spec = base;
    try {
      for (std::size_t a = 0; a < axes.size(); ++a)
        detail::apply_sweep_value(spec, axes[a].param, row.axis_values[a]);
      spec.validate();

      const SolveReport<double> rep = solve(spec);
      row.solver_willing_alice = rep.willing_alice;
      row.solver_willing_bob = rep.willing_bob;
      row.solver_continue_everywhere = rep.strategy.malicious_continues_everywhere();
      row.solver_stop_nodes = int(rep.strategy.malicious_stop_nodes().size());

      row.cf_available = spec.n_packets == 2;
      if (row.cf_available) {
        const ThresholdSet<double> ts = thresholds(
            spec.market.p0, spec.market.delta, spec.preferences.alpha_alice,
            spec.preferences.alpha_bob);
        row.bob_mu_unsatisfiable = ts.bob_mu_unsatisfiable;
        row.alice_mu_unsatisfiable = ts.alice_mu_unsatisfiable;
        row.cf_honesty_applicable =
            spec.collateral_alice == 0.0 && spec.collateral_bob == 0.0;
        row.cf_willing_bob = spec.population.mu_alice > ts.bob_mu_min;
        row.cf_willing_alice = spec.preferences.alpha_alice > ts.alice_alpha_min &&
                               spec.population.mu_bob > ts.alice_mu_min;
        row.cf_collateral_sufficient = spec.collateral_bob > ts.collateral_bob_min &&
                                       spec.collateral_alice > ts.collateral_alice_min;

        row.agree = row.solver_continue_everywhere == row.cf_collateral_sufficient;
        if (row.cf_honesty_applicable)
          row.agree = row.agree && row.solver_willing_alice == row.cf_willing_alice &&
                      row.solver_willing_bob == row.cf_willing_bob;

        // Distances to each threshold drive the boundary and near flags.
        struct Cmp {
          SweepParam param;
          double value;
          double threshold;
          bool honesty;
        };
        const Cmp comparisons[] = {
            {SweepParam::MuAlice, spec.population.mu_alice, ts.bob_mu_min, true},
            {SweepParam::AlphaAlice, spec.preferences.alpha_alice, ts.alice_alpha_min, true},
            {SweepParam::MuBob, spec.population.mu_bob, ts.alice_mu_min, true},
            {SweepParam::CollateralBob, spec.collateral_bob, ts.collateral_bob_min, false},
            {SweepParam::CollateralAlice, spec.collateral_alice, ts.collateral_alice_min, false},
        };
        for (const Cmp& c : comparisons) {
          if (c.honesty && !row.cf_honesty_applicable) continue;
          const double dist = std::abs(c.value - c.threshold);
          if (dist <= kBoundaryRelTol * std::abs(c.threshold)) row.on_boundary = true;
          for (std::size_t a = 0; a < axes.size(); ++a)
            if (axes[a].param == c.param && axes[a].steps > 1 && dist <= axes[a].spacing())
              row.near_threshold = true;
        }
      }
    } catch (const std::invalid_argument& e) {
      row.skipped = true;
      row.diagnostic = e.what();
    }
  };

  if (workers <= 1 || points <= 1) {
    for (std::size_t i = 0; i < points; ++i) evaluate_row(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto run_worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= points) return;
        evaluate_row(i);
      }
    };
    std::vector<std::thread> pool;
    const unsigned count = unsigned(std::min<std::size_t>(workers, points));
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(run_worker);
    for (std::thread& th : pool) th.join();
  }

  SweepSummary& s = result.summary;
  s.points = points;
  for (const SweepRow& row : result.rows) {
    if (row.skipped) {
      ++s.skipped;
      continue;
    }
    if (!row.cf_available) continue;
    ++s.compared;
    if (row.on_boundary) ++s.boundary_points;
    if (row.near_threshold) ++s.near_threshold_points;
    if (!row.agree && !row.on_boundary) ++s.interior_disagreements;
  }
  return result;
}

}  // namespace ppswap
