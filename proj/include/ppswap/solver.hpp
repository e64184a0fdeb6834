#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ppswap/game.hpp"
#include "ppswap/market.hpp"

namespace ppswap {

// Backward-induction solution of the swap game under static type priors.
//
// Decisions happen at steps 0..N; the mover at step k (Alice for even k)
// either stops, ending the game at the time-k price, or continues. A
// continue at step k < N is followed by one price move; the continue at
// step N completes the swap at the time-N price. Honest types continue by
// definition; malicious types best-respond on financial profit alone,
// averaging over the counterparty's type with the static priors and over
// price moves with probability 1/2 each. Priors are never updated, even at
// histories a given type profile would not produce.

struct NodeRef {
  int step = 0;
  int up_moves = 0;
  AgentId mover() const { return mover_at(step); }
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// Pure strategies for every (type, decision node). Honest entries are fixed
// to continue; only malicious entries are stored.
class StrategyProfile {
 public:
  StrategyProfile() = default;
  explicit StrategyProfile(int n_packets)
      : n_(n_packets),
        malicious_(Lattice<double>::node_count(n_packets), Action::Continue) {
    if (n_packets < 1) throw std::invalid_argument("strategy: n_packets must be at least 1");
  }

  int n_packets() const { return n_; }
  AgentId mover(int step) const { return mover_at(step); }

  Action action(int step, int up_moves, AgentType type) const {
    if (type == AgentType::Honest) {
      check(step, up_moves);
      return Action::Continue;
    }
    return malicious_.at(index(step, up_moves));
  }
  Action action(AgentId agent, AgentType type, int step, int up_moves) const {
    if (agent != mover_at(step))
      throw std::domain_error("strategy: agent does not move at this step");
    return action(step, up_moves, type);
  }

  void set_malicious(int step, int up_moves, Action a) {
    if (a != Action::Continue && a != Action::Stop)
      throw std::invalid_argument("strategy: decision must be continue or stop");
    malicious_.at(index(step, up_moves)) = a;
  }

  std::vector<NodeRef> malicious_stop_nodes() const {
    std::vector<NodeRef> out;
    for (int k = 0; k <= n_; ++k)
      for (int j = 0; j <= k; ++j)
        if (malicious_[index(k, j)] == Action::Stop) out.push_back({k, j});
    return out;
  }
  bool malicious_continues_everywhere() const { return malicious_stop_nodes().empty(); }

 private:
  std::size_t index(int step, int up_moves) const {
    check(step, up_moves);
    return std::size_t(step) * std::size_t(step + 1) / 2 + std::size_t(up_moves);
  }
  void check(int step, int up_moves) const {
    if (step < 0 || step > n_ || up_moves < 0 || up_moves > step)
      throw std::domain_error("strategy: node out of range");
  }

  int n_ = 0;
  std::vector<Action> malicious_;
};

// Expected utilities of the node's mover, per own type and action.
template <class T>
struct NodeValues {
  // [type][action], action 0 = continue, 1 = stop.
  std::array<std::array<T, 2>, 2> v{};
};

// Worst-case node of one agent's honesty constraint at one of their steps:
// the price node minimizing continue-minus-stop for the honest type.
template <class T>
struct BindingNode {
  AgentId agent = AgentId::Alice;
  int step = 0;
  int up_moves = 0;
  T margin{};  // honest continue value minus honest stop value
};

template <class T>
struct SolveReport {
  GameSpec<T> spec;
  Lattice<T> lattice;
  StrategyProfile strategy;
  std::vector<NodeValues<T>> values;  // triangular, indexed like the lattice
  bool willing_alice = false;
  bool willing_bob = false;
  std::vector<BindingNode<T>> binding_nodes;  // one per step, in step order
  // The all-down terminal price is exactly zero; stop-versus-continue
  // comparisons that are strict for positive prices tie there.
  bool boundary_degenerate = false;
  bool malicious_root_continues = false;

  static std::size_t node_index(int step, int up_moves) {
    return std::size_t(step) * std::size_t(step + 1) / 2 + std::size_t(up_moves);
  }
  const T& value(int step, int up_moves, AgentType type, Action action) const {
    if (action != Action::Continue && action != Action::Stop)
      throw std::domain_error("report: decision must be continue or stop");
    return values[node_index(step, up_moves)]
        .v[std::size_t(as_index(type))][action == Action::Continue ? 0 : 1];
  }
  Action action(int step, int up_moves, AgentType type) const {
    return strategy.action(step, up_moves, type);
  }
  T honest_margin(int step, int up_moves) const {
    return value(step, up_moves, AgentType::Honest, Action::Continue) -
           value(step, up_moves, AgentType::Honest, Action::Stop);
  }
  bool willing(AgentId a) const { return a == AgentId::Alice ? willing_alice : willing_bob; }
};

namespace detail {

// Value of the game to each agent at a node, conditional on the full type
// profile, when both agents follow the solved strategies from there on.
// [alice_type][bob_type][agent].
template <class T>
using ProfileValues = std::array<std::array<std::array<T, 2>, 2>, 2>;

template <class T>
const T& profile_value(const ProfileValues<T>& pv, AgentType alice, AgentType bob, AgentId of) {
  return pv[std::size_t(as_index(alice))][std::size_t(as_index(bob))][std::size_t(as_index(of))];
}

template <class T>
T& profile_value(ProfileValues<T>& pv, AgentType alice, AgentType bob, AgentId of) {
  return pv[std::size_t(as_index(alice))][std::size_t(as_index(bob))][std::size_t(as_index(of))];
}

}  // namespace detail

template <class T>
SolveReport<T> solve(const GameSpec<T>& spec) {
  spec.validate();
  const int n = spec.n_packets;
  const T half = T(1) / T(2);
  constexpr AgentType kTypes[2] = {AgentType::Honest, AgentType::Malicious};

  SolveReport<T> rep{spec,  Lattice<T>(spec.market),           StrategyProfile(n), {}, false,
                     false, {}, spec.market.degenerate_boundary(), false};
  rep.values.resize(Lattice<T>::node_count(n));

  // Level k+1 profile-conditional values while processing level k.
  std::vector<detail::ProfileValues<T>> next;
  for (int k = n; k >= 0; --k) {
    std::vector<detail::ProfileValues<T>> cur(std::size_t(k) + 1);
    const AgentId mover = mover_at(k);
    const AgentId other = counterparty(mover);
    const T mu_other = spec.population.honest_prior(other);
    for (int j = 0; j <= k; ++j) {
      const T& price = rep.lattice.price(k, j);
      const Outcome<T> stop_out = outcome_at(spec, k, price, mover);
      std::optional<Outcome<T>> success;
      if (k == n) success = outcome_at(spec, n + 1, price, std::nullopt);

      NodeValues<T>& nv = rep.values[SolveReport<T>::node_index(k, j)];
      for (AgentType t : kTypes) {
        const T v_stop = stop_out.utility_of(mover, t);
        T v_cont;
        if (k == n) {
          v_cont = success->utility_of(mover, t);
        } else {
          auto continuation = [&](AgentType other_type) {
            const AgentType ta = mover == AgentId::Alice ? t : other_type;
            const AgentType tb = mover == AgentId::Alice ? other_type : t;
            return half * (detail::profile_value(next[std::size_t(j) + 1], ta, tb, mover) +
                           detail::profile_value(next[std::size_t(j)], ta, tb, mover));
          };
          v_cont = mu_other * continuation(AgentType::Honest) +
                   (T(1) - mu_other) * continuation(AgentType::Malicious);
        }
        nv.v[std::size_t(as_index(t))][0] = v_cont;
        nv.v[std::size_t(as_index(t))][1] = v_stop;
        if (t == AgentType::Malicious)
          // Ties go to stop; willingness below likewise demands a strict edge.
          rep.strategy.set_malicious(k, j, v_cont > v_stop ? Action::Continue : Action::Stop);
      }

      for (AgentType ta : kTypes) {
        for (AgentType tb : kTypes) {
          const AgentType mover_type = mover == AgentId::Alice ? ta : tb;
          const Action act = rep.strategy.action(k, j, mover_type);
          for (AgentId agent : {AgentId::Alice, AgentId::Bob}) {
            const AgentType agent_type = agent == AgentId::Alice ? ta : tb;
            T v;
            if (act == Action::Stop) {
              v = stop_out.utility_of(agent, agent_type);
            } else if (k == n) {
              v = success->utility_of(agent, agent_type);
            } else {
              v = half * (detail::profile_value(next[std::size_t(j) + 1], ta, tb, agent) +
                          detail::profile_value(next[std::size_t(j)], ta, tb, agent));
            }
            detail::profile_value(cur[std::size_t(j)], ta, tb, agent) = v;
          }
        }
      }
    }
    next = std::move(cur);
  }

  // Honesty audit: continue must beat stop strictly for the honest type at
  // every price node of the agent's steps. All nodes count as reachable:
  // honest types continue everywhere, so no node is off the honest path.
  rep.willing_alice = true;
  rep.willing_bob = true;
  for (int k = 0; k <= n; ++k) {
    const AgentId agent = mover_at(k);
    std::optional<T> worst;
    int worst_j = 0;
    for (int j = 0; j <= k; ++j) {
      const T margin = rep.honest_margin(k, j);
      if (!worst || margin < *worst) {
        worst = margin;
        worst_j = j;
      }
      if (!(margin > T(0))) {
        (agent == AgentId::Alice ? rep.willing_alice : rep.willing_bob) = false;
      }
    }
    rep.binding_nodes.push_back({agent, k, worst_j, *worst});
  }
  rep.malicious_root_continues =
      rep.strategy.action(0, 0, AgentType::Malicious) == Action::Continue;
  return rep;
}

template <class T>
struct HonestyAudit {
  bool willing_alice = false;
  bool willing_bob = false;
  std::vector<BindingNode<T>> binding_nodes;
};

// Whether continue is a strict best response for each honest type at every
// decision node, with the worst-case price node per step.
template <class T>
HonestyAudit<T> audit_honesty(const GameSpec<T>& spec) {
  SolveReport<T> rep = solve(spec);
  return {rep.willing_alice, rep.willing_bob, std::move(rep.binding_nodes)};
}

// Expected utility of one agent of known type at an arbitrary position, by
// exhaustive enumeration: every counterparty type (weighted by the static
// prior) crossed with every completion of the remaining price moves
// (weighted 2^-moves), each played out to a terminal outcome under the
// given profile. No value recursion; this is the independent check on
// solve(). Exponential in n_packets, hence the guard.
template <class T>
T oracle_value(const GameSpec<T>& spec, const StrategyProfile& profile, AgentId agent,
               AgentType type, const History& history) {
  spec.validate();
  const int n = spec.n_packets;
  if (n > 12) throw std::domain_error("oracle: enumeration limited to n_packets <= 12");
  if (profile.n_packets() != n)
    throw std::invalid_argument("oracle: profile does not match the game");
  const GamePosition pos = interpret(history, n);

  const AgentId other = counterparty(agent);
  const T mu_other = spec.population.honest_prior(other);
  const int remaining = n - history.waits();
  const std::uint64_t paths = std::uint64_t(1) << remaining;
  const T path_weight = T(1) / T(std::int64_t(paths));

  T total(0);
  for (AgentType other_type : {AgentType::Honest, AgentType::Malicious}) {
    const T type_weight =
        other_type == AgentType::Honest ? mu_other : T(1) - mu_other;
    for (std::uint64_t bits = 0; bits < paths; ++bits) {
      int step = pos.step;
      int ups = pos.up_moves;
      int used = 0;
      bool pending = pos.pending_move;
      Outcome<T> out;
      if (pos.terminal) {
        const int price_time = pos.stopped ? pos.exit_step : n;
        out = outcome_at(spec, pos.exit_step, spec.market.node_price(price_time, ups),
                         pos.stopped ? std::optional<AgentId>(mover_at(pos.exit_step))
                                     : std::nullopt);
      } else {
        for (;;) {
          if (pending) {
            ups += (bits >> used) & 1u;
            ++used;
            pending = false;
          }
          const AgentId mover = mover_at(step);
          const AgentType mover_type = mover == agent ? type : other_type;
          if (profile.action(step, ups, mover_type) == Action::Stop) {
            out = outcome_at(spec, step, spec.market.node_price(step, ups), mover);
            break;
          }
          if (step == n) {
            out = outcome_at(spec, n + 1, spec.market.node_price(n, ups), std::nullopt);
            break;
          }
          ++step;
          pending = true;
        }
      }
      total += type_weight * path_weight * out.utility_of(agent, type);
    }
  }
  return total;
}

}  // namespace ppswap
