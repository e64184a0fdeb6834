#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ppswap {

// Symmetric binomial model for the price of asset 1 quoted in asset 2.
// Starting from p0 the price moves by +delta or -delta once per period,
// each direction with probability 1/2, for `horizon` periods. The walk
// recombines, so a node is identified by (time, up_moves) and its price
// is p0 + (2*up_moves - time) * delta.
//
// T must model a field constructible from int. With double, identities
// such as the martingale property hold exactly only for exactly
// representable inputs (integers and small dyadics); use an exact
// rational type where exact equality matters.
template <class T>
struct MarketModel {
  T p0{};
  T delta{};
  int horizon = 0;

  void validate() const {
    if (!(p0 > T(0))) throw std::invalid_argument("market: p0 must be positive");
    if (delta < T(0)) throw std::invalid_argument("market: delta must be non-negative");
    if (horizon < 0) throw std::invalid_argument("market: horizon must be non-negative");
    if (min_price() < T(0))
      throw std::invalid_argument(
          "market: horizon * delta must not exceed p0 (the price must stay non-negative)");
  }

  T min_price() const { return p0 - T(horizon) * delta; }
  T max_price() const { return p0 + T(horizon) * delta; }

  // True when the all-down path ends exactly at price zero. Analyses whose
  // strict inequalities degenerate at a zero terminal price report it.
  bool degenerate_boundary() const { return min_price() == T(0); }

  T node_price(int time, int up_moves) const {
    return p0 + T(2 * up_moves - time) * delta;
  }
};

template <class T>
struct PriceNode {
  int time = 0;
  int up_moves = 0;
  T price{};
};

// One price step: the up child carries price + delta, the down child
// price - delta, each reached with probability 1/2.
template <class T>
std::pair<PriceNode<T>, PriceNode<T>> evolve(const MarketModel<T>& model,
                                             const PriceNode<T>& node) {
  if (node.time >= model.horizon)
    throw std::domain_error("evolve: node is already at the horizon");
  PriceNode<T> up{node.time + 1, node.up_moves + 1, node.price + model.delta};
  PriceNode<T> down{node.time + 1, node.up_moves, node.price - model.delta};
  return {up, down};
}

// Recombining lattice of all (horizon+1)(horizon+2)/2 price nodes.
// Immutable after construction; safe to share across threads.
template <class T>
class Lattice {
 public:
  explicit Lattice(MarketModel<T> model) : model_(std::move(model)) {
    model_.validate();
    prices_.reserve(node_count(model_.horizon));
    for (int t = 0; t <= model_.horizon; ++t)
      for (int j = 0; j <= t; ++j) prices_.push_back(model_.node_price(t, j));
  }

  const MarketModel<T>& model() const { return model_; }
  int horizon() const { return model_.horizon; }

  static std::size_t node_count(int horizon) {
    return std::size_t(horizon + 1) * std::size_t(horizon + 2) / 2;
  }
  std::size_t size() const { return prices_.size(); }

  const T& price(int time, int up_moves) const { return prices_[index(time, up_moves)]; }
  PriceNode<T> at(int time, int up_moves) const { return {time, up_moves, price(time, up_moves)}; }

  // Probability that the walk sits at (time, up_moves): C(time, up_moves) / 2^time.
  T weight(int time, int up_moves) const {
    check(time, up_moves);
    if (time > 62) throw std::domain_error("lattice: weight overflows past time 62");
    return T(binomial(time, up_moves)) / T(std::int64_t(1) << time);
  }

  static std::int64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    // Pascal's rule; every intermediate stays within the final magnitude.
    std::vector<std::int64_t> row(std::size_t(k) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
      for (int j = std::min(i, k); j >= 1; --j) row[std::size_t(j)] += row[std::size_t(j) - 1];
    return row[std::size_t(k)];
  }

 private:
  std::size_t index(int time, int up_moves) const {
    check(time, up_moves);
    return std::size_t(time) * std::size_t(time + 1) / 2 + std::size_t(up_moves);
  }
  void check(int time, int up_moves) const {
    if (time < 0 || time > model_.horizon || up_moves < 0 || up_moves > time)
      throw std::domain_error("lattice: node out of range");
  }

  MarketModel<T> model_;
  std::vector<T> prices_;
};

}  // namespace ppswap
