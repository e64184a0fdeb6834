#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ppswap/game.hpp"
#include "ppswap/solver.hpp"

namespace ppswap {

// Seeded population simulation: per sample, draw the two agent types from
// the priors and a price path from fair coins, then play the solved
// strategies to a terminal outcome. Every sample's randomness derives only
// from (seed, sample index), and aggregation runs over fixed-size chunks
// merged in index order, so results are bit-identical for a given
// (seed, samples) no matter how many workers run.

namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Counter-derived per-sample stream (splitmix64 over a mixed seed).
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t sample_index)
      : state_(mix64(seed + 0x9e3779b97f4a7c15ULL * (sample_index + 1))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform in [0, 1), 53 random bits.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return next_unit() < p; }
  bool coin_up() { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

}  // namespace rng

struct SimConfig {
  GameSpec<double> spec;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  void validate() const {
    spec.validate();
    if (samples < 1) throw std::invalid_argument("simulate: samples must be at least 1");
    if (workers < 1) throw std::invalid_argument("simulate: workers must be at least 1");
  }
};

struct StepStats {
  std::uint64_t count = 0;
  // Worst outcomes over honest agents only, per exit step. net is the full
  // price-and-collateral loss; exposure is the unreciprocated final packet
  // valued at the exit price (zero at step 0 and on success).
  double max_honest_net_loss = 0.0;
  double max_honest_exposure_loss = 0.0;
};

struct SimResult {
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
  std::uint64_t completions = 0;
  double failure_rate = 0.0;
  double std_error = 0.0;  // sqrt(r (1 - r) / samples)
  std::vector<StepStats> exit_steps;              // index = exit step, 0..n_packets+1
  std::array<std::array<std::uint64_t, 2>, 2> type_counts{};  // [agent][type]
  std::array<std::array<double, 2>, 2> mean_utility{};        // [agent][type]
  double max_honest_net_loss = 0.0;
  double max_honest_exposure_loss = 0.0;

  std::uint64_t count_of(AgentId a, AgentType t) const {
    return type_counts[std::size_t(as_index(a))][std::size_t(as_index(t))];
  }
  double mean_utility_of(AgentId a, AgentType t) const {
    return mean_utility[std::size_t(as_index(a))][std::size_t(as_index(t))];
  }
};

namespace detail {

struct ChunkAccum {
  std::uint64_t failures = 0;
  std::vector<std::uint64_t> exit_counts;
  std::array<std::array<std::uint64_t, 2>, 2> type_counts{};
  std::array<std::array<double, 2>, 2> utility_sums{};
  std::vector<double> step_max_net;
  std::vector<double> step_max_exposure;
};

// Play one sample to its terminal outcome under the solved strategies.
inline Outcome<double> play_out(const GameSpec<double>& spec, const StrategyProfile& profile,
                                bool alice_honest, bool bob_honest, rng::SampleStream& stream) {
  const int n = spec.n_packets;
  int step = 0;
  int ups = 0;
  for (;;) {
    const AgentId mover = mover_at(step);
    const bool honest = mover == AgentId::Alice ? alice_honest : bob_honest;
    const AgentType type = honest ? AgentType::Honest : AgentType::Malicious;
    if (profile.action(step, ups, type) == Action::Stop)
      return outcome_at(spec, step, spec.market.node_price(step, ups), mover);
    if (step == n)
      return outcome_at(spec, n + 1, spec.market.node_price(n, ups), std::nullopt);
    if (stream.coin_up()) ++ups;
    ++step;
  }
}

}  // namespace detail

// Fixed chunk size decouples the reduction order from the worker count.
inline constexpr std::uint64_t kSimChunk = 8192;

inline SimResult simulate(const SimConfig& config, const StrategyProfile& profile) {
  config.validate();
  if (profile.n_packets() != config.spec.n_packets)
    throw std::invalid_argument("simulate: strategy profile does not match the spec");
  const GameSpec<double>& spec = config.spec;
  const int n = spec.n_packets;
  const std::uint64_t chunks = (config.samples + kSimChunk - 1) / kSimChunk;
  std::vector<detail::ChunkAccum> accums(chunks);

  std::atomic<std::uint64_t> next_chunk{0};
  auto run_worker = [&] {
    for (;;) {
      const std::uint64_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      detail::ChunkAccum& acc = accums[c];
      acc.exit_counts.assign(std::size_t(n) + 2, 0);
      acc.step_max_net.assign(std::size_t(n) + 2, 0.0);
      acc.step_max_exposure.assign(std::size_t(n) + 2, 0.0);
      const std::uint64_t begin = c * kSimChunk;
      const std::uint64_t end = std::min(begin + kSimChunk, config.samples);
      for (std::uint64_t i = begin; i < end; ++i) {
        rng::SampleStream stream(config.seed, i);
        const bool alice_honest = stream.bernoulli(spec.population.mu_alice);
        const bool bob_honest = stream.bernoulli(spec.population.mu_bob);
        const Outcome<double> out =
            detail::play_out(spec, profile, alice_honest, bob_honest, stream);
        const std::size_t step = std::size_t(out.exit_step);
        acc.exit_counts[step] += 1;
        if (out.success_x != 1) acc.failures += 1;
        for (AgentId a : {AgentId::Alice, AgentId::Bob}) {
          const bool honest = a == AgentId::Alice ? alice_honest : bob_honest;
          const AgentType t = honest ? AgentType::Honest : AgentType::Malicious;
          acc.type_counts[std::size_t(as_index(a))][std::size_t(as_index(t))] += 1;
          acc.utility_sums[std::size_t(as_index(a))][std::size_t(as_index(t))] +=
              out.utility_of(a, t);
          if (honest) {
            const double net_loss = std::max(0.0, -out.financial_of(a));
            acc.step_max_net[step] = std::max(acc.step_max_net[step], net_loss);
            if (out.success_x != 1 && out.exit_step >= 1 && exit_victim(out.exit_step) == a) {
              const double exposure = stranded_packet_value(spec, out.exit_step, out.exit_price);
              acc.step_max_exposure[step] = std::max(acc.step_max_exposure[step], exposure);
            }
          }
        }
      }
    }
  };

  const unsigned worker_count =
      unsigned(std::min<std::uint64_t>(config.workers, std::max<std::uint64_t>(chunks, 1)));
  if (worker_count <= 1) {
    run_worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (unsigned w = 0; w < worker_count; ++w) pool.emplace_back(run_worker);
    for (std::thread& th : pool) th.join();
  }

  // Merge in chunk order; sums and maxima only, so the worker schedule
  // cannot influence the result.
  SimResult result;
  result.samples = config.samples;
  result.exit_steps.assign(std::size_t(n) + 2, StepStats{});
  std::array<std::array<double, 2>, 2> utility_sums{};
  for (const detail::ChunkAccum& acc : accums) {
    result.failures += acc.failures;
    for (std::size_t s = 0; s < result.exit_steps.size(); ++s) {
      result.exit_steps[s].count += acc.exit_counts[s];
      result.exit_steps[s].max_honest_net_loss =
          std::max(result.exit_steps[s].max_honest_net_loss, acc.step_max_net[s]);
      result.exit_steps[s].max_honest_exposure_loss =
          std::max(result.exit_steps[s].max_honest_exposure_loss, acc.step_max_exposure[s]);
    }
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t t = 0; t < 2; ++t) {
        result.type_counts[a][t] += acc.type_counts[a][t];
        utility_sums[a][t] += acc.utility_sums[a][t];
      }
  }
  result.completions = result.samples - result.failures;
  result.failure_rate = double(result.failures) / double(result.samples);
  result.std_error =
      std::sqrt(result.failure_rate * (1.0 - result.failure_rate) / double(result.samples));
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t t = 0; t < 2; ++t)
      result.mean_utility[a][t] =
          result.type_counts[a][t] ? utility_sums[a][t] / double(result.type_counts[a][t]) : 0.0;
  for (const StepStats& s : result.exit_steps) {
    result.max_honest_net_loss = std::max(result.max_honest_net_loss, s.max_honest_net_loss);
    result.max_honest_exposure_loss =
        std::max(result.max_honest_exposure_loss, s.max_honest_exposure_loss);
  }
  return result;
}

inline SimResult simulate(const SimConfig& config) {
  config.validate();
  return simulate(config, solve(config.spec).strategy);
}

// Per-exit-step view of a simulation with the protocol's exposure cap: one
// packet for the opening transfer, two packets for every later one, valued
// at the highest lattice price. Completions carry no abandonment exposure.
struct ExitProfileRow {
  int step = 0;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double max_honest_net_loss = 0.0;
  double max_honest_exposure_loss = 0.0;
  double exposure_bound = 0.0;
};

inline std::vector<ExitProfileRow> exit_profile(const GameSpec<double>& spec,
                                                const SimResult& result) {
  spec.validate();
  if (result.exit_steps.size() != std::size_t(spec.n_packets) + 2)
    throw std::invalid_argument("exit_profile: result does not match the spec");
  const double max_price = spec.market.max_price();
  const double packet = 1.0 / double(spec.n_packets);
  std::vector<ExitProfileRow> rows;
  rows.reserve(result.exit_steps.size());
  for (std::size_t s = 0; s < result.exit_steps.size(); ++s) {
    ExitProfileRow row;
    row.step = int(s);
    row.count = result.exit_steps[s].count;
    row.frequency = double(row.count) / double(result.samples);
    row.max_honest_net_loss = result.exit_steps[s].max_honest_net_loss;
    row.max_honest_exposure_loss = result.exit_steps[s].max_honest_exposure_loss;
    if (row.step == 1) row.exposure_bound = packet * max_price;
    else if (row.step >= 2 && row.step <= spec.n_packets)
      row.exposure_bound = 2.0 * packet * max_price;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ppswap
