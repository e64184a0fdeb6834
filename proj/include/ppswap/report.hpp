#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppswap/analysis.hpp"
#include "ppswap/config.hpp"
#include "ppswap/montecarlo.hpp"
#include "ppswap/solver.hpp"

namespace ppswap {

// Machine-readable output. Reports are single JSON documents rendered by a
// small writer of our own so that every real number is printed with exactly
// 12 significant digits and byte-for-byte reproducibly; sweep rows also
// come as comma-separated text with a header row.

inline constexpr int kSchemaVersion = 1;

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class JsonValue {
 public:
  static JsonValue null() { return JsonValue(Kind::Null); }
  static JsonValue boolean(bool b) {
    JsonValue v(Kind::Bool);
    v.bool_ = b;
    return v;
  }
  static JsonValue integer(std::int64_t i) {
    JsonValue v(Kind::Int);
    v.int_ = i;
    return v;
  }
  static JsonValue unsigned_integer(std::uint64_t u) {
    JsonValue v(Kind::UInt);
    v.uint_ = u;
    return v;
  }
  static JsonValue number(double d) {
    JsonValue v(Kind::Double);
    v.double_ = d;
    return v;
  }
  static JsonValue number(std::optional<double> d) {
    return d ? number(*d) : null();
  }
  static JsonValue string(std::string s) {
    JsonValue v(Kind::String);
    v.string_ = std::move(s);
    return v;
  }
  static JsonValue array() { return JsonValue(Kind::Array); }
  static JsonValue object() { return JsonValue(Kind::Object); }

  JsonValue& add(std::string key, JsonValue v) {
    members_.emplace_back(std::move(key), std::move(v));
    return *this;
  }
  JsonValue& push(JsonValue v) {
    items_.push_back(std::move(v));
    return *this;
  }

  std::string dump() const {
    std::string out;
    write(out, 0);
    out.push_back('\n');
    return out;
  }

 private:
  enum class Kind { Null, Bool, Int, UInt, Double, String, Array, Object };
  explicit JsonValue(Kind k) : kind_(k) {}

  static void escape(const std::string& s, std::string& out) {
    out.push_back('"');
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out.push_back('"');
  }

  void write(std::string& out, int depth) const {
    const std::string pad(std::size_t(depth) * 2, ' ');
    const std::string inner(std::size_t(depth + 1) * 2, ' ');
    switch (kind_) {
      case Kind::Null: out += "null"; break;
      case Kind::Bool: out += bool_ ? "true" : "false"; break;
      case Kind::Int: out += std::to_string(int_); break;
      case Kind::UInt: out += std::to_string(uint_); break;
      case Kind::Double: out += format_number(double_); break;
      case Kind::String: escape(string_, out); break;
      case Kind::Array:
        if (items_.empty()) {
          out += "[]";
          break;
        }
        out += "[\n";
        for (std::size_t i = 0; i < items_.size(); ++i) {
          out += inner;
          items_[i].write(out, depth + 1);
          if (i + 1 < items_.size()) out.push_back(',');
          out.push_back('\n');
        }
        out += pad + "]";
        break;
      case Kind::Object:
        if (members_.empty()) {
          out += "{}";
          break;
        }
        out += "{\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
          out += inner;
          escape(members_[i].first, out);
          out += ": ";
          members_[i].second.write(out, depth + 1);
          if (i + 1 < members_.size()) out.push_back(',');
          out.push_back('\n');
        }
        out += pad + "}";
        break;
    }
  }

  Kind kind_;
  bool bool_ = false;
  std::int64_t int_ = 0;
  std::uint64_t uint_ = 0;
  double double_ = 0.0;
  std::string string_;
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> members_;
};

inline JsonValue spec_json(const GameSpec<double>& spec) {
  JsonValue out = JsonValue::object();
  out.add("p0", JsonValue::number(spec.market.p0));
  out.add("delta", JsonValue::number(spec.market.delta));
  out.add("n_packets", JsonValue::integer(spec.n_packets));
  out.add("alpha_a", JsonValue::number(spec.preferences.alpha_alice));
  out.add("alpha_b", JsonValue::number(spec.preferences.alpha_bob));
  out.add("mu_a", JsonValue::number(spec.population.mu_alice));
  out.add("mu_b", JsonValue::number(spec.population.mu_bob));
  out.add("collateral_a", JsonValue::number(spec.collateral_alice));
  out.add("collateral_b", JsonValue::number(spec.collateral_bob));
  out.add("collateral_disposition", JsonValue::string(to_string(spec.disposition)));
  return out;
}

inline JsonValue solve_report_json(const SolveReport<double>& rep) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("solve"));
  doc.add("spec", spec_json(rep.spec));
  doc.add("boundary_degenerate", JsonValue::boolean(rep.boundary_degenerate));
  JsonValue willing = JsonValue::object();
  willing.add("alice", JsonValue::boolean(rep.willing_alice));
  willing.add("bob", JsonValue::boolean(rep.willing_bob));
  doc.add("willing_honesty", std::move(willing));
  doc.add("malicious_root_continues", JsonValue::boolean(rep.malicious_root_continues));
  doc.add("malicious_continues_everywhere",
          JsonValue::boolean(rep.strategy.malicious_continues_everywhere()));

  JsonValue stops = JsonValue::array();
  for (const NodeRef& node : rep.strategy.malicious_stop_nodes()) {
    JsonValue row = JsonValue::object();
    row.add("step", JsonValue::integer(node.step));
    row.add("up_moves", JsonValue::integer(node.up_moves));
    stops.push(std::move(row));
  }
  doc.add("malicious_stop_nodes", std::move(stops));

  JsonValue binding = JsonValue::array();
  for (const BindingNode<double>& b : rep.binding_nodes) {
    JsonValue row = JsonValue::object();
    row.add("agent", JsonValue::string(to_string(b.agent)));
    row.add("step", JsonValue::integer(b.step));
    row.add("up_moves", JsonValue::integer(b.up_moves));
    row.add("price", JsonValue::number(rep.lattice.price(b.step, b.up_moves)));
    row.add("honest_margin", JsonValue::number(b.margin));
    binding.push(std::move(row));
  }
  doc.add("binding_nodes", std::move(binding));

  JsonValue nodes = JsonValue::array();
  for (int k = 0; k <= rep.spec.n_packets; ++k) {
    for (int j = 0; j <= k; ++j) {
      JsonValue row = JsonValue::object();
      row.add("step", JsonValue::integer(k));
      row.add("up_moves", JsonValue::integer(j));
      row.add("price", JsonValue::number(rep.lattice.price(k, j)));
      row.add("mover", JsonValue::string(to_string(mover_at(k))));
      for (AgentType t : {AgentType::Honest, AgentType::Malicious}) {
        JsonValue side = JsonValue::object();
        side.add("continue_value", JsonValue::number(rep.value(k, j, t, Action::Continue)));
        side.add("stop_value", JsonValue::number(rep.value(k, j, t, Action::Stop)));
        side.add("action", JsonValue::string(to_string(rep.action(k, j, t))));
        row.add(to_string(t), std::move(side));
      }
      nodes.push(std::move(row));
    }
  }
  doc.add("nodes", std::move(nodes));
  return doc;
}

inline std::string solve_csv(const SolveReport<double>& rep) {
  std::string out =
      "step,up_moves,price,mover,honest_continue,honest_stop,honest_action,"
      "malicious_continue,malicious_stop,malicious_action\n";
  for (int k = 0; k <= rep.spec.n_packets; ++k) {
    for (int j = 0; j <= k; ++j) {
      out += std::to_string(k) + "," + std::to_string(j) + "," +
             format_number(rep.lattice.price(k, j)) + "," + to_string(mover_at(k));
      for (AgentType t : {AgentType::Honest, AgentType::Malicious}) {
        out += "," + format_number(rep.value(k, j, t, Action::Continue));
        out += "," + format_number(rep.value(k, j, t, Action::Stop));
        out += std::string(",") + to_string(rep.action(k, j, t));
      }
      out += "\n";
    }
  }
  return out;
}

inline JsonValue thresholds_json(const GameSpec<double>& spec, const ThresholdSet<double>& ts) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("thresholds"));
  doc.add("spec", spec_json(spec));
  JsonValue t = JsonValue::object();
  t.add("bob_mu_min", JsonValue::number(ts.bob_mu_min));
  t.add("bob_mu_unsatisfiable", JsonValue::boolean(ts.bob_mu_unsatisfiable));
  t.add("alice_alpha_min", JsonValue::number(ts.alice_alpha_min));
  t.add("alice_mu_min", JsonValue::number(ts.alice_mu_min));
  t.add("alice_mu_unsatisfiable", JsonValue::boolean(ts.alice_mu_unsatisfiable));
  t.add("collateral_bob_min", JsonValue::number(ts.collateral_bob_min));
  t.add("collateral_alice_min", JsonValue::number(ts.collateral_alice_min));
  doc.add("thresholds", std::move(t));
  return doc;
}

inline std::string thresholds_csv(const ThresholdSet<double>& ts) {
  std::string out =
      "bob_mu_min,bob_mu_unsatisfiable,alice_alpha_min,alice_mu_min,"
      "alice_mu_unsatisfiable,collateral_bob_min,collateral_alice_min\n";
  out += format_number(ts.bob_mu_min) + "," + (ts.bob_mu_unsatisfiable ? "true" : "false") +
         "," + format_number(ts.alice_alpha_min) + "," + format_number(ts.alice_mu_min) + "," +
         (ts.alice_mu_unsatisfiable ? "true" : "false") + "," +
         format_number(ts.collateral_bob_min) + "," + format_number(ts.collateral_alice_min) +
         "\n";
  return out;
}

inline JsonValue simulate_json(const SimConfig& config, const SolveReport<double>& solved,
                               const SimResult& result) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("simulate"));
  doc.add("spec", spec_json(config.spec));
  doc.add("seed", JsonValue::unsigned_integer(config.seed));
  doc.add("samples", JsonValue::unsigned_integer(config.samples));
  doc.add("failures", JsonValue::unsigned_integer(result.failures));
  doc.add("completions", JsonValue::unsigned_integer(result.completions));
  doc.add("failure_rate", JsonValue::number(result.failure_rate));
  doc.add("std_error", JsonValue::number(result.std_error));
  const FailureRate<double> reference = failure_probability(config.spec.population);
  doc.add("reference_failure_rate", JsonValue::number(reference.value));
  doc.add("reference_assumes", JsonValue::string(std::string(reference.assumes)));
  JsonValue willing = JsonValue::object();
  willing.add("alice", JsonValue::boolean(solved.willing_alice));
  willing.add("bob", JsonValue::boolean(solved.willing_bob));
  doc.add("willing_honesty", std::move(willing));

  JsonValue histogram = JsonValue::array();
  for (const ExitProfileRow& row : exit_profile(config.spec, result)) {
    JsonValue r = JsonValue::object();
    r.add("exit_step", JsonValue::integer(row.step));
    r.add("count", JsonValue::unsigned_integer(row.count));
    r.add("frequency", JsonValue::number(row.frequency));
    r.add("max_honest_net_loss", JsonValue::number(row.max_honest_net_loss));
    r.add("max_honest_exposure_loss", JsonValue::number(row.max_honest_exposure_loss));
    r.add("exposure_bound", JsonValue::number(row.exposure_bound));
    histogram.push(std::move(r));
  }
  doc.add("exit_profile", std::move(histogram));

  JsonValue means = JsonValue::array();
  for (AgentId a : {AgentId::Alice, AgentId::Bob}) {
    for (AgentType t : {AgentType::Honest, AgentType::Malicious}) {
      JsonValue r = JsonValue::object();
      r.add("agent", JsonValue::string(to_string(a)));
      r.add("type", JsonValue::string(to_string(t)));
      r.add("samples", JsonValue::unsigned_integer(result.count_of(a, t)));
      r.add("mean_utility", JsonValue::number(result.mean_utility_of(a, t)));
      means.push(std::move(r));
    }
  }
  doc.add("mean_utility", std::move(means));
  return doc;
}

inline std::string simulate_csv(const GameSpec<double>& spec, const SimResult& result) {
  std::string out =
      "exit_step,count,frequency,max_honest_net_loss,max_honest_exposure_loss,"
      "exposure_bound\n";
  for (const ExitProfileRow& row : exit_profile(spec, result)) {
    out += std::to_string(row.step) + "," + std::to_string(row.count) + "," +
           format_number(row.frequency) + "," + format_number(row.max_honest_net_loss) + "," +
           format_number(row.max_honest_exposure_loss) + "," +
           format_number(row.exposure_bound) + "\n";
  }
  return out;
}

inline JsonValue sweep_axes_json(const std::vector<SweepAxis>& axes) {
  JsonValue out = JsonValue::array();
  for (const SweepAxis& a : axes) {
    JsonValue axis = JsonValue::object();
    axis.add("param", JsonValue::string(to_string(a.param)));
    axis.add("from", JsonValue::number(a.from));
    axis.add("to", JsonValue::number(a.to));
    axis.add("steps", JsonValue::integer(a.steps));
    out.push(std::move(axis));
  }
  return out;
}

inline JsonValue sweep_row_json(const SweepRow& row, const std::vector<SweepAxis>& axes) {
  JsonValue r = JsonValue::object();
  for (std::size_t a = 0; a < axes.size(); ++a)
    r.add(to_string(axes[a].param), JsonValue::number(row.axis_values[a]));
  r.add("skipped", JsonValue::boolean(row.skipped));
  if (row.skipped) {
    r.add("diagnostic", JsonValue::string(row.diagnostic));
    return r;
  }
  r.add("solver_willing_alice", JsonValue::boolean(row.solver_willing_alice));
  r.add("solver_willing_bob", JsonValue::boolean(row.solver_willing_bob));
  r.add("solver_continue_everywhere", JsonValue::boolean(row.solver_continue_everywhere));
  r.add("solver_stop_nodes", JsonValue::integer(row.solver_stop_nodes));
  r.add("cf_available", JsonValue::boolean(row.cf_available));
  if (row.cf_available) {
    r.add("cf_honesty_applicable", JsonValue::boolean(row.cf_honesty_applicable));
    r.add("cf_willing_alice", JsonValue::boolean(row.cf_willing_alice));
    r.add("cf_willing_bob", JsonValue::boolean(row.cf_willing_bob));
    r.add("cf_collateral_sufficient", JsonValue::boolean(row.cf_collateral_sufficient));
    r.add("bob_mu_unsatisfiable", JsonValue::boolean(row.bob_mu_unsatisfiable));
    r.add("alice_mu_unsatisfiable", JsonValue::boolean(row.alice_mu_unsatisfiable));
    r.add("agree", JsonValue::boolean(row.agree));
    r.add("on_boundary", JsonValue::boolean(row.on_boundary));
    r.add("near_threshold", JsonValue::boolean(row.near_threshold));
  }
  return r;
}

inline JsonValue sweep_summary_json(const SweepSummary& s) {
  JsonValue out = JsonValue::object();
  out.add("points", JsonValue::unsigned_integer(s.points));
  out.add("skipped", JsonValue::unsigned_integer(s.skipped));
  out.add("compared", JsonValue::unsigned_integer(s.compared));
  out.add("interior_disagreements", JsonValue::unsigned_integer(s.interior_disagreements));
  out.add("boundary_points", JsonValue::unsigned_integer(s.boundary_points));
  out.add("near_threshold_points", JsonValue::unsigned_integer(s.near_threshold_points));
  return out;
}

inline JsonValue sweep_json(const SweepResult& result, const std::vector<SweepAxis>& axes) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("sweep"));
  doc.add("axes", sweep_axes_json(axes));
  doc.add("summary", sweep_summary_json(result.summary));
  JsonValue rows = JsonValue::array();
  for (const SweepRow& row : result.rows) rows.push(sweep_row_json(row, axes));
  doc.add("rows", std::move(rows));
  return doc;
}

inline std::string sweep_csv(const SweepResult& result, const std::vector<SweepAxis>& axes) {
  std::string out;
  for (const SweepAxis& a : axes) {
    out += to_string(a.param);
    out += ",";
  }
  out +=
      "skipped,solver_willing_alice,solver_willing_bob,solver_continue_everywhere,"
      "solver_stop_nodes,cf_available,cf_honesty_applicable,cf_willing_alice,cf_willing_bob,"
      "cf_collateral_sufficient,bob_mu_unsatisfiable,alice_mu_unsatisfiable,agree,"
      "on_boundary,near_threshold,diagnostic\n";
  auto flag = [](bool b) { return b ? "true" : "false"; };
  for (const SweepRow& row : result.rows) {
    for (double v : row.axis_values) {
      out += format_number(v);
      out += ",";
    }
    out += flag(row.skipped);
    if (row.skipped) {
      out += ",,,,,,,,,,,,,,,";
      std::string d = row.diagnostic;
      for (char& c : d)
        if (c == ',') c = ';';
      out += d + "\n";
      continue;
    }
    out += std::string(",") + flag(row.solver_willing_alice) + "," +
           flag(row.solver_willing_bob) + "," + flag(row.solver_continue_everywhere) + "," +
           std::to_string(row.solver_stop_nodes) + "," + flag(row.cf_available);
    if (row.cf_available) {
      out += std::string(",") + flag(row.cf_honesty_applicable) + "," +
             flag(row.cf_willing_alice) + "," + flag(row.cf_willing_bob) + "," +
             flag(row.cf_collateral_sufficient) + "," + flag(row.bob_mu_unsatisfiable) + "," +
             flag(row.alice_mu_unsatisfiable) + "," + flag(row.agree) + "," +
             flag(row.on_boundary) + "," + flag(row.near_threshold) + ",";
    } else {
      out += ",,,,,,,,,,";
    }
    out += "\n";
  }
  return out;
}

inline JsonValue verify_closed_form_json(const SweepResult& result,
                                         const std::vector<SweepAxis>& axes) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("verify"));
  doc.add("mode", JsonValue::string("closed_form"));
  doc.add("axes", sweep_axes_json(axes));
  doc.add("summary", sweep_summary_json(result.summary));
  doc.add("passed", JsonValue::boolean(result.summary.interior_disagreements == 0));
  return doc;
}

inline JsonValue verify_numeric_json(const GameSpec<double>& spec,
                                     const NumericThresholds& nt) {
  JsonValue doc = JsonValue::object();
  doc.add("schema_version", JsonValue::integer(kSchemaVersion));
  doc.add("command", JsonValue::string("verify"));
  doc.add("mode", JsonValue::string("numeric"));
  doc.add("note", JsonValue::string(
                      "closed-form thresholds exist only for n_packets = 2; "
                      "thresholds below are located numerically for this spec"));
  doc.add("spec", spec_json(spec));
  JsonValue t = JsonValue::object();
  t.add("bob_mu_min", JsonValue::number(nt.bob_mu_min));
  t.add("alice_mu_min", JsonValue::number(nt.alice_mu_min));
  t.add("alice_alpha_min", JsonValue::number(nt.alice_alpha_min));
  t.add("bob_alpha_min", JsonValue::number(nt.bob_alpha_min));
  t.add("collateral_bob_min", JsonValue::number(nt.collateral_bob_min));
  t.add("collateral_alice_min", JsonValue::number(nt.collateral_alice_min));
  doc.add("numeric_thresholds", std::move(t));
  return doc;
}

}  // namespace ppswap
