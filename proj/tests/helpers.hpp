#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <random>
#include <utility>
#include <vector>

#include "ppswap/ppswap.hpp"

namespace ppswap::testing {

using rational = boost::multiprecision::cpp_rational;

template <class T>
GameSpec<T> make_spec(T p0, T delta, int n_packets, T alpha_a, T alpha_b, T mu_a, T mu_b,
                      T collateral_a = T(0), T collateral_b = T(0),
                      CollateralDisposition disposition = CollateralDisposition::Burned) {
  GameSpec<T> spec;
  spec.market = {std::move(p0), std::move(delta), n_packets};
  spec.n_packets = n_packets;
  spec.preferences = {std::move(alpha_a), std::move(alpha_b)};
  spec.population = {std::move(mu_a), std::move(mu_b)};
  spec.collateral_alice = std::move(collateral_a);
  spec.collateral_bob = std::move(collateral_b);
  spec.disposition = disposition;
  return spec;
}

inline GameSpec<double> baseline_spec(double mu_a = 0.9, double mu_b = 0.8,
                                      double alpha_a = 40.0, double alpha_b = 50.0) {
  return make_spec(100.0, 10.0, 2, alpha_a, alpha_b, mu_a, mu_b);
}

// Random game with small-denominator rational parameters so exact
// arithmetic stays cheap. delta is strictly below p0 / n_packets.
struct RationalSpecOptions {
  bool with_collateral = false;
  bool allow_degenerate_delta = false;  // admit delta == p0 / n_packets
};

inline GameSpec<rational> random_rational_spec(std::mt19937_64& rng, int n_packets,
                                               RationalSpecOptions opts = {}) {
  auto pick = [&](long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(rng);
  };
  const long p0 = pick(20, 400);
  const long delta_num = opts.allow_degenerate_delta ? pick(0, 8) : pick(0, 7);
  const rational delta = rational(p0 * delta_num, 8 * n_packets);
  GameSpec<rational> spec = make_spec<rational>(
      rational(p0), delta, n_packets, rational(pick(0, 300)), rational(pick(0, 300)),
      rational(pick(0, 16), 16), rational(pick(0, 16), 16));
  if (opts.with_collateral) {
    spec.collateral_alice = rational(pick(0, 2 * p0));
    spec.collateral_bob = rational(pick(0, 2 * p0));
    spec.disposition = pick(0, 1) ? CollateralDisposition::TransferredToCounterparty
                                  : CollateralDisposition::Burned;
  }
  spec.validate();
  return spec;
}

// History with `continues` completed decisions of which `up_moves` price
// moves went up, positioned at the next decision.
inline History history_at(int continues, int up_moves) {
  History h;
  for (int i = 0; i < continues; ++i) {
    h.append(Action::Continue);
    h.append(i < up_moves ? Action::WaitUp : Action::WaitDown);
  }
  return h;
}

// Ledger positions implied by the transfer schedule after `completed`
// transfers, valued at `price`: the independent accounting oracle for the
// staged payoff. Returns (alice, bob) value changes in asset-2 terms.
template <class T>
std::pair<T, T> ledger_positions(const GameSpec<T>& spec, int completed, const T& price) {
  T alice{};
  T bob{};
  for (const TransferStep<T>& tr : transfer_schedule(spec)) {
    if (tr.step > completed) break;
    alice += tr.asset2 - tr.asset1 * price;
    bob += tr.asset1 * price - tr.asset2;
  }
  return {alice, bob};
}

}  // namespace ppswap::testing
