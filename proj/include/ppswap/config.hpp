#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppswap/analysis.hpp"
#include "ppswap/game.hpp"
#include "ppswap/montecarlo.hpp"

namespace ppswap {

// Key-value run configuration. One `key = value` per line, `#` comments,
// blank lines ignored. Repeated keys keep the last value, except `sweep`
// lines, which accumulate one grid axis each:
//
//   p0 = 100
//   delta = 10
//   sweep = mu_a 0 1 11
//
// Unknown keys are rejected by name.
struct RunConfig {
  double p0 = 100.0;
  double delta = 10.0;
  int n_packets = 2;
  double alpha_a = 40.0;
  double alpha_b = 50.0;
  double mu_a = 0.9;
  double mu_b = 0.8;
  double collateral_a = 0.0;
  double collateral_b = 0.0;
  CollateralDisposition collateral_disposition = CollateralDisposition::Burned;
  std::uint64_t seed = 42;
  std::uint64_t samples = 100000;
  std::vector<SweepAxis> sweep_axes;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const std::string text(value);
    const double out = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: invalid number for '" + std::string(key) + "'");
  }
}

inline std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  const std::string text(value);
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("");
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: invalid unsigned integer for '" + std::string(key) +
                                "'");
  }
}

inline int parse_int(std::string_view key, std::string_view value) {
  const std::string text(value);
  try {
    std::size_t used = 0;
    const int out = std::stoi(text, &used);
    if (used != text.size()) throw std::invalid_argument("");
    return out;
  } catch (...) {
    throw std::invalid_argument("config: invalid integer for '" + std::string(key) + "'");
  }
}

}  // namespace detail

inline SweepParam parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::P0, SweepParam::Delta, SweepParam::AlphaAlice,
                       SweepParam::AlphaBob, SweepParam::MuAlice, SweepParam::MuBob,
                       SweepParam::CollateralAlice, SweepParam::CollateralBob,
                       SweepParam::NPackets}) {
    if (name == to_string(p)) return p;
  }
  throw std::invalid_argument("config: unknown sweep parameter '" + std::string(name) + "'");
}

inline RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: expected 'key = value' on line " +
                                  std::to_string(line_no));
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config: empty key or value on line " +
                                  std::to_string(line_no));

    if (key == "p0") cfg.p0 = detail::parse_double(key, value);
    else if (key == "delta") cfg.delta = detail::parse_double(key, value);
    else if (key == "n_packets") cfg.n_packets = detail::parse_int(key, value);
    else if (key == "alpha_a") cfg.alpha_a = detail::parse_double(key, value);
    else if (key == "alpha_b") cfg.alpha_b = detail::parse_double(key, value);
    else if (key == "mu_a") cfg.mu_a = detail::parse_double(key, value);
    else if (key == "mu_b") cfg.mu_b = detail::parse_double(key, value);
    else if (key == "collateral_a") cfg.collateral_a = detail::parse_double(key, value);
    else if (key == "collateral_b") cfg.collateral_b = detail::parse_double(key, value);
    else if (key == "collateral_disposition") {
      if (value == "burned") cfg.collateral_disposition = CollateralDisposition::Burned;
      else if (value == "transferred")
        cfg.collateral_disposition = CollateralDisposition::TransferredToCounterparty;
      else
        throw std::invalid_argument(
            "config: collateral_disposition must be 'burned' or 'transferred'");
    } else if (key == "seed") cfg.seed = detail::parse_u64(key, value);
    else if (key == "samples") cfg.samples = detail::parse_u64(key, value);
    else if (key == "sweep") {
      std::istringstream fields{std::string(value)};
      std::string param, from, to, steps, extra;
      fields >> param >> from >> to >> steps;
      if (!fields || (fields >> extra))
        throw std::invalid_argument(
            "config: sweep needs exactly 'param from to steps' on line " +
            std::to_string(line_no));
      SweepAxis axis;
      axis.param = parse_sweep_param(param);
      axis.from = detail::parse_double("sweep from", from);
      axis.to = detail::parse_double("sweep to", to);
      axis.steps = detail::parse_int("sweep steps", steps);
      axis.validate();
      cfg.sweep_axes.push_back(axis);
    } else {
      throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

inline GameSpec<double> to_game_spec(const RunConfig& cfg) {
  GameSpec<double> spec;
  spec.market = {cfg.p0, cfg.delta, cfg.n_packets};
  spec.n_packets = cfg.n_packets;
  spec.preferences = {cfg.alpha_a, cfg.alpha_b};
  spec.population = {cfg.mu_a, cfg.mu_b};
  spec.collateral_alice = cfg.collateral_a;
  spec.collateral_bob = cfg.collateral_b;
  spec.disposition = cfg.collateral_disposition;
  spec.validate();
  return spec;
}

inline SimConfig to_sim_config(const RunConfig& cfg, unsigned workers) {
  SimConfig sim{to_game_spec(cfg), cfg.samples, cfg.seed, workers};
  sim.validate();
  return sim;
}

}  // namespace ppswap
