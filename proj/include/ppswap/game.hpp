#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppswap/market.hpp"

namespace ppswap {

// The two-party swap: Alice brings one unit of asset 1, Bob brings p0 units
// of asset 2. The trade is split into n_packets granularity packets and
// executed as n_packets+1 alternating transfers where each transfer matches
// the counterparty's outstanding packet and extends by one more.

enum class AgentId : int { Alice = 0, Bob = 1 };
enum class AgentType : int { Honest = 0, Malicious = 1 };

constexpr int as_index(AgentId a) { return static_cast<int>(a); }
constexpr int as_index(AgentType t) { return static_cast<int>(t); }
constexpr AgentId counterparty(AgentId a) {
  return a == AgentId::Alice ? AgentId::Bob : AgentId::Alice;
}

// Direction of an agent's exposure to the asset-1 price: Bob accumulates
// asset 1 (+1), Alice gives it up (-1).
constexpr int exposure_sign(AgentId a) { return a == AgentId::Alice ? -1 : +1; }

// Decisions at steps 0, 2, 4, ... belong to Alice, odd steps to Bob.
constexpr AgentId mover_at(int step) { return step % 2 == 0 ? AgentId::Alice : AgentId::Bob; }

constexpr const char* to_string(AgentId a) { return a == AgentId::Alice ? "alice" : "bob"; }
constexpr const char* to_string(AgentType t) {
  return t == AgentType::Honest ? "honest" : "malicious";
}

// Completion preference of the honest type, in units of asset 2. The
// malicious type's preference is zero by definition.
template <class T>
struct Preferences {
  T alpha_alice{};
  T alpha_bob{};

  void validate() const {
    if (alpha_alice < T(0) || alpha_bob < T(0))
      throw std::invalid_argument("preferences: alpha must be non-negative");
  }
  const T& alpha_honest(AgentId a) const {
    return a == AgentId::Alice ? alpha_alice : alpha_bob;
  }
};

// Static type priors: the probability that a randomly matched Alice (Bob)
// is honest. Priors are never updated during a game.
template <class T>
struct Population {
  T mu_alice{};
  T mu_bob{};

  void validate() const {
    if (mu_alice < T(0) || mu_alice > T(1) || mu_bob < T(0) || mu_bob > T(1))
      throw std::invalid_argument("population: mu must lie in [0, 1]");
  }
  const T& honest_prior(AgentId a) const { return a == AgentId::Alice ? mu_alice : mu_bob; }
};

// What happens to collateral forfeited by a stopping agent. The forfeiting
// agent's own loss is identical either way.
enum class CollateralDisposition { Burned, TransferredToCounterparty };

constexpr const char* to_string(CollateralDisposition d) {
  return d == CollateralDisposition::Burned ? "burned" : "transferred";
}

// One complete game instance.
template <class T>
struct GameSpec {
  MarketModel<T> market{};
  int n_packets = 0;
  Preferences<T> preferences{};
  Population<T> population{};
  T collateral_alice{};
  T collateral_bob{};
  CollateralDisposition disposition = CollateralDisposition::Burned;

  void validate() const {
    market.validate();
    if (n_packets < 1) throw std::invalid_argument("game: n_packets must be at least 1");
    if (market.horizon != n_packets)
      throw std::invalid_argument("game: market horizon must equal n_packets");
    preferences.validate();
    population.validate();
    if (collateral_alice < T(0) || collateral_bob < T(0))
      throw std::invalid_argument("game: collateral must be non-negative");
  }

  T alpha(AgentId a, AgentType t) const {
    return t == AgentType::Malicious ? T(0) : preferences.alpha_honest(a);
  }
  const T& collateral(AgentId a) const {
    return a == AgentId::Alice ? collateral_alice : collateral_bob;
  }
};

// Moves recorded in a history. A price move ("wait") always carries its
// realized direction so a history pins down the current price node.
enum class Action : int { Continue = 0, Stop = 1, WaitUp = 2, WaitDown = 3 };

constexpr bool is_wait(Action a) { return a == Action::WaitUp || a == Action::WaitDown; }

inline const char* to_string(Action a) {
  switch (a) {
    case Action::Continue: return "c";
    case Action::Stop: return "s";
    case Action::WaitUp: return "w+";
    case Action::WaitDown: return "w-";
  }
  return "?";
}

// Ordered action sequence. Decisions (c or s) and price moves alternate:
// every continue except a final one is followed by exactly one price move,
// and nothing follows a stop. Rules that depend on the packet count (when
// the final continue terminates the game) live in interpret() below.
class History {
 public:
  History() = default;

  // Tokens c, s, w+, w- separated by commas, whitespace or braces.
  static History parse(std::string_view text) {
    History h;
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      if (token == "c") h.append(Action::Continue);
      else if (token == "s") h.append(Action::Stop);
      else if (token == "w+") h.append(Action::WaitUp);
      else if (token == "w-") h.append(Action::WaitDown);
      else if (token == "w")
        throw std::invalid_argument("history: price move needs a direction, use w+ or w-");
      else
        throw std::invalid_argument("history: unknown token '" + token + "'");
      token.clear();
    };
    for (char ch : text) {
      if (ch == ',' || ch == ' ' || ch == '\t' || ch == '{' || ch == '}') flush();
      else token.push_back(ch);
    }
    flush();
    return h;
  }

  History& append(Action a) {
    if (stopped_) throw std::invalid_argument("history: no moves may follow a stop");
    if (is_wait(a)) {
      if (continues_ != waits_ + 1)
        throw std::invalid_argument("history: price move without a preceding continue");
      ++waits_;
      if (a == Action::WaitUp) ++ups_;
    } else {
      if (continues_ != waits_)
        throw std::invalid_argument("history: decision while a price move is pending");
      if (a == Action::Continue) ++continues_;
      else stopped_ = true;
    }
    moves_.push_back(a);
    return *this;
  }

  const std::vector<Action>& moves() const { return moves_; }
  int continues() const { return continues_; }
  int waits() const { return waits_; }
  int up_moves() const { return ups_; }
  bool ends_with_stop() const { return stopped_; }

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < moves_.size(); ++i) {
      if (i) out += ",";
      out += ppswap::to_string(moves_[i]);
    }
    out += "}";
    return out;
  }

 private:
  std::vector<Action> moves_;
  int continues_ = 0;
  int waits_ = 0;
  int ups_ = 0;
  bool stopped_ = false;
};

// Where a history leaves the game, for a given packet count.
struct GamePosition {
  int step = 0;       // continues completed so far
  int up_moves = 0;   // realized up price moves
  bool pending_move = false;  // a price move is due before the next decision
  bool terminal = false;
  bool stopped = false;       // terminal via stop (otherwise terminal = success)
  int exit_step = 0;          // meaningful when terminal
};

inline GamePosition interpret(const History& h, int n_packets) {
  if (n_packets < 1) throw std::invalid_argument("history: n_packets must be at least 1");
  if (h.waits() > n_packets)
    throw std::invalid_argument("history: more price moves than the horizon allows");
  if (h.continues() > n_packets + 1)
    throw std::invalid_argument("history: more continues than the game has decisions");
  GamePosition pos;
  pos.step = h.continues();
  pos.up_moves = h.up_moves();
  if (h.ends_with_stop()) {
    pos.terminal = true;
    pos.stopped = true;
    pos.exit_step = h.continues();
  } else if (h.continues() == n_packets + 1) {
    pos.terminal = true;
    pos.exit_step = n_packets + 1;
  } else {
    pos.pending_move = h.continues() == h.waits() + 1;
  }
  return pos;
}

// One transfer of the schedule. Amounts are in natural units: asset 1 in
// units of the asset, asset 2 in units of asset 2.
template <class T>
struct TransferStep {
  int step = 0;
  AgentId sender = AgentId::Alice;
  T asset1{};
  T asset2{};
};

// The match-and-extend schedule: the first transfer is one packet, every
// later transfer matches the counterparty's outstanding packet and extends
// by one more, and the final transfer only matches. Asset 2 moves at par
// (p0 per unit of asset 1). n_packets+1 transfers in total, Alice first.
template <class T>
std::vector<TransferStep<T>> transfer_schedule(const GameSpec<T>& spec) {
  spec.validate();
  const int n = spec.n_packets;
  const T packet = T(1) / T(n);
  std::vector<TransferStep<T>> out;
  out.reserve(std::size_t(n) + 1);
  T sent_alice{};  // unit fraction of asset 1 Alice has sent
  T sent_bob{};    // unit-fraction equivalent of asset 2 Bob has sent
  for (int step = 1; step <= n + 1; ++step) {
    const bool extend = step <= n;
    if (step % 2 == 1) {
      T target = sent_bob;
      if (extend) target += packet;
      out.push_back({step, AgentId::Alice, target - sent_alice, T(0)});
      sent_alice = target;
    } else {
      T target = sent_alice;
      if (extend) target += packet;
      out.push_back({step, AgentId::Bob, T(0), (target - sent_bob) * spec.market.p0});
      sent_bob = target;
    }
  }
  return out;
}

// Net ledger position of Bob when the game ends at exit_step n, valued at
// the price prevailing then: the asset-1 fraction received times the price,
// minus the asset-2 paid. Alice's financial position is the negation.
//   n = 0:                     0
//   n odd,  0 < n <= N:        (n/N) P - ((n-1)/N) p0
//   n even, 0 < n <= N:        ((n-1)/N) P - (n/N) p0
//   n = N+1 (success):         P - p0
template <class T>
T payoff_y(int exit_step, int n_packets, const T& p0, const T& price_at_exit) {
  if (n_packets < 1) throw std::invalid_argument("payoff: n_packets must be at least 1");
  if (exit_step < 0 || exit_step > n_packets + 1)
    throw std::domain_error("payoff: exit step out of range");
  const int n = exit_step;
  const T N = T(n_packets);
  if (n == 0) return T(0);
  if (n == n_packets + 1) return price_at_exit - p0;
  if (n % 2 == 1) return T(n) / N * price_at_exit - T(n - 1) / N * p0;
  return T(n - 1) / N * price_at_exit - T(n) / N * p0;
}

template <class T>
T payoff_y(const GameSpec<T>& spec, int exit_step, const T& price_at_exit) {
  return payoff_y(exit_step, spec.n_packets, spec.market.p0, price_at_exit);
}

// Utility of a terminal position: alpha * X + beta_i * y - own forfeited
// collateral, with beta_bob = +1, beta_alice = -1 and X = +1 on success,
// -1 on failure. Collateral credited to a counterparty (transferred
// disposition) is accounted for by the caller.
template <class T>
T utility(AgentId agent, AgentType type, const T& alpha, int success_x, const T& y,
          const T& forfeited_own_collateral) {
  if (success_x != 1 && success_x != -1)
    throw std::domain_error("utility: success indicator must be +1 or -1");
  if (type == AgentType::Malicious && alpha != T(0))
    throw std::domain_error("utility: malicious agents have zero completion preference");
  return T(success_x) * alpha + T(exposure_sign(agent)) * y - forfeited_own_collateral;
}

// Everything observable at the end of one play-through.
template <class T>
struct Outcome {
  int success_x = -1;
  int exit_step = 0;
  T exit_price{};
  T y{};
  std::optional<AgentId> stopper;
  // [agent][type]; each entry is independent of the other agent's type.
  std::array<std::array<T, 2>, 2> utilities{};
  // Price and collateral terms only, no completion preference.
  std::array<T, 2> financial{};

  const T& utility_of(AgentId a, AgentType t) const {
    return utilities[std::size_t(as_index(a))][std::size_t(as_index(t))];
  }
  const T& financial_of(AgentId a) const { return financial[std::size_t(as_index(a))]; }
};

// Outcome of a game ending at exit_step with the given exit price. stopper
// names the agent whose stop ended the game; it is nullopt exactly when the
// game completed. Only the stopper forfeits collateral.
template <class T>
Outcome<T> outcome_at(const GameSpec<T>& spec, int exit_step, const T& exit_price,
                      std::optional<AgentId> stopper) {
  Outcome<T> out;
  out.exit_step = exit_step;
  out.exit_price = exit_price;
  out.success_x = exit_step == spec.n_packets + 1 ? +1 : -1;
  out.y = payoff_y(spec, exit_step, exit_price);
  if (out.success_x == 1 && stopper)
    throw std::domain_error("outcome: a completed game has no stopper");
  if (out.success_x == -1 && !stopper)
    throw std::domain_error("outcome: a failed game needs the stopping agent");
  out.stopper = stopper;
  for (AgentId a : {AgentId::Alice, AgentId::Bob}) {
    T forfeited = stopper && *stopper == a ? spec.collateral(a) : T(0);
    T credited = stopper && *stopper != a &&
                         spec.disposition == CollateralDisposition::TransferredToCounterparty
                     ? spec.collateral(*stopper)
                     : T(0);
    for (AgentType t : {AgentType::Honest, AgentType::Malicious}) {
      out.utilities[std::size_t(as_index(a))][std::size_t(as_index(t))] =
          utility(a, t, spec.alpha(a, t), out.success_x, out.y, forfeited) + credited;
    }
    out.financial[std::size_t(as_index(a))] =
        T(exposure_sign(a)) * out.y - forfeited + credited;
  }
  return out;
}

// Outcome of a terminal history. A stop at decision step k is valued at the
// time-k price; success is valued at the time-N price (the final continue is
// not followed by a price move).
template <class T>
Outcome<T> terminal_outcome(const GameSpec<T>& spec, const History& h) {
  spec.validate();
  GamePosition pos = interpret(h, spec.n_packets);
  if (!pos.terminal) throw std::domain_error("outcome: history is not terminal");
  const int price_time = pos.stopped ? pos.exit_step : spec.n_packets;
  if (h.waits() != price_time)
    throw std::domain_error("outcome: history is missing realized price moves");
  const T price = spec.market.node_price(price_time, pos.up_moves);
  std::optional<AgentId> stopper;
  if (pos.stopped) stopper = mover_at(pos.exit_step);
  return outcome_at(spec, pos.exit_step, price, stopper);
}

// The agent whose final transfer goes unreciprocated when the game fails at
// exit_step >= 1: the sender of transfer number exit_step.
inline AgentId exit_victim(int exit_step) {
  if (exit_step < 1) throw std::domain_error("exit_victim: nothing was transferred");
  return exit_step % 2 == 1 ? AgentId::Alice : AgentId::Bob;
}

// Value of the victim's unreciprocated packet at a failure exit: one
// granularity packet of asset 1 at the exit price (odd exits) or of asset 2
// at par (even exits). Zero at step 0 and on success.
template <class T>
T stranded_packet_value(const GameSpec<T>& spec, int exit_step, const T& exit_price) {
  if (exit_step <= 0 || exit_step > spec.n_packets) return T(0);
  const T packet = T(1) / T(spec.n_packets);
  return exit_step % 2 == 1 ? packet * exit_price : packet * spec.market.p0;
}

}  // namespace ppswap
