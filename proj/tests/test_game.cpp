#include <catch2/catch.hpp>

#include <random>
#include <stdexcept>

#include "helpers.hpp"

using namespace ppswap;
using ppswap::testing::ledger_positions;
using ppswap::testing::make_spec;
using ppswap::testing::random_rational_spec;
using ppswap::testing::rational;

namespace {

GameSpec<rational> rspec(long p0, long delta, int n, long alpha_a = 0, long alpha_b = 0) {
  return make_spec<rational>(rational(p0), rational(delta), n, rational(alpha_a),
                             rational(alpha_b), rational(1), rational(1));
}

}  // namespace

TEST_CASE("transfer schedule follows match-and-extend", "[game]") {
  SECTION("two packets: half the asset, the full payment, the other half") {
    const auto sched = transfer_schedule(rspec(100, 10, 2));
    REQUIRE(sched.size() == 3);
    REQUIRE(sched[0].sender == AgentId::Alice);
    REQUIRE(sched[0].asset1 == rational(1, 2));
    REQUIRE(sched[0].asset2 == 0);
    REQUIRE(sched[1].sender == AgentId::Bob);
    REQUIRE(sched[1].asset1 == 0);
    REQUIRE(sched[1].asset2 == 100);
    REQUIRE(sched[2].sender == AgentId::Alice);
    REQUIRE(sched[2].asset1 == rational(1, 2));
    REQUIRE(sched[2].asset2 == 0);
  }

  SECTION("one packet collapses to a plain swap") {
    const auto sched = transfer_schedule(rspec(100, 0, 1));
    REQUIRE(sched.size() == 2);
    REQUIRE(sched[0].sender == AgentId::Alice);
    REQUIRE(sched[0].asset1 == 1);
    REQUIRE(sched[1].sender == AgentId::Bob);
    REQUIRE(sched[1].asset2 == 100);
  }

  SECTION("four packets: cumulative ladder") {
    const auto sched = transfer_schedule(rspec(100, 10, 4));
    REQUIRE(sched.size() == 5);
    rational cum1(0), cum2(0);
    const rational expect1[] = {{1, 4}, {1, 4}, {3, 4}, {3, 4}, {1}};
    const rational expect2[] = {{0}, {1, 2}, {1, 2}, {1}, {1}};
    for (int i = 0; i < 5; ++i) {
      cum1 += sched[i].asset1;
      cum2 += sched[i].asset2;
      REQUIRE(cum1 == expect1[i]);
      REQUIRE(cum2 == expect2[i] * 100);
    }
  }

  SECTION("totals, alternation and positivity for any packet count") {
    for (int n = 1; n <= 8; ++n) {
      const auto sched = transfer_schedule(rspec(977, 0, n));
      REQUIRE(sched.size() == std::size_t(n) + 1);
      rational total1(0), total2(0);
      for (std::size_t i = 0; i < sched.size(); ++i) {
        REQUIRE(sched[i].step == int(i) + 1);
        REQUIRE(sched[i].sender == (i % 2 == 0 ? AgentId::Alice : AgentId::Bob));
        REQUIRE(sched[i].asset1 + sched[i].asset2 > 0);
        total1 += sched[i].asset1;
        total2 += sched[i].asset2;
      }
      REQUIRE(total1 == 1);
      REQUIRE(total2 == 977);
    }
  }
}

TEST_CASE("staged payoff equals the schedule's ledger accounting", "[game]") {
  // Independent oracle: accumulate the schedule transfer by transfer and
  // value the books at the exit price. Bob's ledger must equal the staged
  // payoff at every exit step and every price, and the two ledgers must
  // cancel exactly.
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 8; ++n) {
    for (int trial = 0; trial < 6; ++trial) {
      const GameSpec<rational> spec = random_rational_spec(rng, n);
      const Lattice<rational> lat(spec.market);
      for (int exit = 0; exit <= n + 1; ++exit) {
        const int time = exit == n + 1 ? n : exit;
        for (int j = 0; j <= time; ++j) {
          const rational price = lat.price(time, j);
          const auto [alice, bob] = ledger_positions(spec, exit, price);
          REQUIRE(alice + bob == 0);
          REQUIRE(payoff_y(spec, exit, price) == bob);
          REQUIRE(payoff_y(spec, exit, price) == -alice);
        }
      }
    }
  }
}

TEST_CASE("staged payoff reference values", "[game]") {
  const GameSpec<rational> spec = rspec(100, 10, 2);
  REQUIRE(payoff_y(spec, 0, rational(100)) == 0);
  REQUIRE(payoff_y(spec, 1, rational(110)) == 55);
  REQUIRE(payoff_y(spec, 2, rational(80)) == -60);
  REQUIRE(payoff_y(spec, 3, rational(100)) == 0);
  REQUIRE_THROWS_AS(payoff_y(spec, 4, rational(100)), std::domain_error);
  REQUIRE_THROWS_AS(payoff_y(spec, -1, rational(100)), std::domain_error);
}

TEST_CASE("utility combines preference, exposure and forfeiture", "[game]") {
  using A = AgentId;
  using T = AgentType;
  REQUIRE(utility(A::Bob, T::Malicious, 0.0, -1, 55.0, 0.0) == 55.0);
  REQUIRE(utility(A::Alice, T::Honest, 30.0, +1, 0.0, 0.0) == 30.0);
  REQUIRE(utility(A::Alice, T::Honest, 30.0, -1, -60.0, 0.0) == 30.0);
  REQUIRE(utility(A::Bob, T::Honest, 30.0, +1, 20.0, 0.0) == 50.0);
  REQUIRE(utility(A::Alice, T::Honest, 30.0, -1, 10.0, 25.0) == -65.0);
  REQUIRE_THROWS_AS(utility(A::Bob, T::Malicious, 1.0, -1, 0.0, 0.0), std::domain_error);
  REQUIRE_THROWS_AS(utility(A::Bob, T::Honest, 1.0, 0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("history structure and parsing", "[game]") {
  const History h = History::parse("{c,w-,c,w+,s}");
  REQUIRE(h.continues() == 2);
  REQUIRE(h.waits() == 2);
  REQUIRE(h.up_moves() == 1);
  REQUIRE(h.ends_with_stop());
  REQUIRE(h.to_string() == "{c,w-,c,w+,s}");
  REQUIRE(History::parse("c w- c w+ s").to_string() == h.to_string());

  REQUIRE_THROWS_AS(History::parse("w+"), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse("c,c"), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse("c,w+,w-"), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse("s,c"), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse("c,w"), std::invalid_argument);
  REQUIRE_THROWS_AS(History::parse("c,x"), std::invalid_argument);
}

TEST_CASE("history interpretation against a packet count", "[game]") {
  // The two-packet game: histories are prefixes of {c,w,c,w,c}, with stop
  // allowed at each decision slot.
  const GamePosition root = interpret(History{}, 2);
  REQUIRE((root.step == 0 && !root.pending_move && !root.terminal));

  const GamePosition after_c = interpret(History::parse("c"), 2);
  REQUIRE(after_c.pending_move);
  REQUIRE(after_c.step == 1);

  const GamePosition at_bob = interpret(History::parse("c,w+"), 2);
  REQUIRE((at_bob.step == 1 && !at_bob.pending_move && !at_bob.terminal));
  REQUIRE(at_bob.up_moves == 1);
  REQUIRE(mover_at(at_bob.step) == AgentId::Bob);

  const GamePosition stopped = interpret(History::parse("c,w-,s"), 2);
  REQUIRE(stopped.terminal);
  REQUIRE(stopped.stopped);
  REQUIRE(stopped.exit_step == 1);

  const GamePosition done = interpret(History::parse("c,w-,c,w+,c"), 2);
  REQUIRE(done.terminal);
  REQUIRE_FALSE(done.stopped);
  REQUIRE(done.exit_step == 3);

  // The same sequence is merely a pending position in a three-packet game.
  const GamePosition pending = interpret(History::parse("c,w-,c,w+,c"), 3);
  REQUIRE_FALSE(pending.terminal);
  REQUIRE(pending.pending_move);

  REQUIRE_THROWS_AS(interpret(History::parse("c,w-,c,w+,c,w-"), 2), std::invalid_argument);
  REQUIRE_THROWS_AS(interpret(History::parse("c,w-,c,w+,c"), 1), std::invalid_argument);
}

TEST_CASE("terminal outcomes", "[game]") {
  GameSpec<rational> spec = make_spec<rational>(rational(100), rational(10), 2, rational(30),
                                                rational(50), rational(1), rational(1));

  SECTION("stop after the first transfer on the down path") {
    const auto out = terminal_outcome(spec, History::parse("c,w-,s"));
    REQUIRE(out.exit_step == 1);
    REQUIRE(out.exit_price == 90);
    REQUIRE(out.y == 45);
    REQUIRE(out.success_x == -1);
    REQUIRE(out.stopper == AgentId::Bob);
    REQUIRE(out.utility_of(AgentId::Bob, AgentType::Malicious) == 45);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Malicious) == -45);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Honest) == -75);
  }

  SECTION("stop before anything moves") {
    const auto out = terminal_outcome(spec, History::parse("s"));
    REQUIRE(out.exit_step == 0);
    REQUIRE(out.y == 0);
    REQUIRE(out.stopper == AgentId::Alice);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Honest) == -30);
  }

  SECTION("completion on the up-up path") {
    const auto out = terminal_outcome(spec, History::parse("c,w+,c,w+,c"));
    REQUIRE(out.success_x == 1);
    REQUIRE(out.exit_step == 3);
    REQUIRE(out.y == 20);
    REQUIRE_FALSE(out.stopper.has_value());
    REQUIRE(out.utility_of(AgentId::Bob, AgentType::Honest) == 70);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Honest) == 10);
  }

  SECTION("non-terminal histories are rejected") {
    REQUIRE_THROWS_AS(terminal_outcome(spec, History::parse("c,w+")), std::domain_error);
    REQUIRE_THROWS_AS(terminal_outcome(spec, History::parse("c")), std::domain_error);
  }
}

TEST_CASE("collateral forfeiture and disposition", "[game]") {
  GameSpec<rational> spec = make_spec<rational>(rational(100), rational(10), 2, rational(30),
                                                rational(50), rational(1), rational(1),
                                                rational(7), rational(13));

  SECTION("only the stopping agent forfeits") {
    const auto out = terminal_outcome(spec, History::parse("c,w-,s"));  // Bob stops
    REQUIRE(out.utility_of(AgentId::Bob, AgentType::Malicious) == 45 - 13);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Malicious) == -45);
    const auto success = terminal_outcome(spec, History::parse("c,w-,c,w-,c"));
    REQUIRE(success.utility_of(AgentId::Bob, AgentType::Honest) == 50 - 20);  // no forfeiture
  }

  SECTION("transferred collateral credits the counterparty, stopper unchanged") {
    spec.disposition = CollateralDisposition::TransferredToCounterparty;
    const auto out = terminal_outcome(spec, History::parse("c,w-,s"));
    REQUIRE(out.utility_of(AgentId::Bob, AgentType::Malicious) == 45 - 13);
    REQUIRE(out.utility_of(AgentId::Alice, AgentType::Malicious) == -45 + 13);
    REQUIRE(out.financial_of(AgentId::Alice) + out.financial_of(AgentId::Bob) == 0);
  }

  SECTION("burned collateral leaves the books short by the deposit") {
    const auto out = terminal_outcome(spec, History::parse("c,w-,s"));
    REQUIRE(out.financial_of(AgentId::Alice) + out.financial_of(AgentId::Bob) == -13);
  }

  SECTION("raising own collateral strictly lowers stop outcomes only") {
    GameSpec<rational> more = spec;
    more.collateral_alice += 5;
    for (const char* h : {"s", "c,w+,c,w+,s", "c,w-,c,w-,s"}) {
      const auto base = terminal_outcome(spec, History::parse(h));
      const auto raised = terminal_outcome(more, History::parse(h));
      REQUIRE(raised.utility_of(AgentId::Alice, AgentType::Malicious) <
              base.utility_of(AgentId::Alice, AgentType::Malicious));
      REQUIRE(raised.utility_of(AgentId::Alice, AgentType::Honest) <
              base.utility_of(AgentId::Alice, AgentType::Honest));
    }
    // Bob's stop and every completion are untouched by Alice's deposit.
    const auto bob_stop = History::parse("c,w-,s");
    REQUIRE(terminal_outcome(more, bob_stop).utility_of(AgentId::Alice, AgentType::Honest) ==
            terminal_outcome(spec, bob_stop).utility_of(AgentId::Alice, AgentType::Honest));
    const auto success = History::parse("c,w+,c,w-,c");
    REQUIRE(terminal_outcome(more, success).utility_of(AgentId::Alice, AgentType::Honest) ==
            terminal_outcome(spec, success).utility_of(AgentId::Alice, AgentType::Honest));
  }
}

TEST_CASE("stranded packet exposure at failure exits", "[game]") {
  const GameSpec<rational> spec = rspec(100, 10, 2);
  REQUIRE(stranded_packet_value(spec, 0, rational(100)) == 0);
  REQUIRE(stranded_packet_value(spec, 1, rational(90)) == 45);   // half a unit at 90
  REQUIRE(stranded_packet_value(spec, 2, rational(120)) == 50);  // half the payment at par
  REQUIRE(stranded_packet_value(spec, 3, rational(100)) == 0);   // success
  REQUIRE(exit_victim(1) == AgentId::Alice);
  REQUIRE(exit_victim(2) == AgentId::Bob);
  REQUIRE_THROWS_AS(exit_victim(0), std::domain_error);
}

TEST_CASE("game spec validation", "[game]") {
  GameSpec<double> spec = ppswap::testing::baseline_spec();
  REQUIRE_NOTHROW(spec.validate());

  GameSpec<double> bad = spec;
  bad.n_packets = 3;  // horizon still 2
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.market.delta = 55.0;  // 2 * 55 > 100
  REQUIRE_THROWS_WITH(bad.validate(), Catch::Matchers::Contains("p0"));
  bad = spec;
  bad.population.mu_alice = 1.5;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.collateral_bob = -1.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.preferences.alpha_alice = -2.0;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
