#include "bra/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace bra {

double Trace::value_at(int t, const std::string& component,
                       const std::string& port) const {
  for (const auto& r : records) {
    if (r.t == t && r.component == component && r.port == port) return r.value;
  }
  throw BraError("trace has no record for (" + std::to_string(t) + ", '" +
                 component + "', '" + port + "')");
}

int Trace::first_active(const std::string& component, const std::string& port,
                        double threshold) const {
  int best = -1;
  bool found_port = false;
  for (const auto& r : records) {
    if (r.component != component || r.port != port) continue;
    found_port = true;
    if (r.value >= threshold && (best < 0 || r.t < best)) best = r.t;
  }
  if (!found_port) {
    throw BraError("trace has no channel ('" + component + "', '" + port +
                   "')");
  }
  return best;
}

namespace {

std::string config_fingerprint(const Hcd& hcd, const StubBindings& bindings,
                               const Schedule& schedule, int steps,
                               std::uint64_t seed) {
  std::ostringstream os;
  os << hcd.id << '|' << steps << '|' << seed;
  for (const auto& [comp, stub] : bindings) {
    os << '|' << comp << ':' << static_cast<int>(stub.kind) << ':' << stub.value
       << ':' << stub.k << ':' << stub.theta << ':' << stub.arity;
    for (const auto& [key, value] : stub.table_entries) {
      os << ',' << key << '=' << value;
    }
  }
  for (const auto& [name, series] : schedule) {
    os << '|' << name;
    for (double v : series) os << ',' << v;
  }
  return hash_hex(fnv1a64(os.str()));
}

struct ComponentState {
  const Component* component = nullptr;
  const StubSpec* stub = nullptr;
  std::vector<std::string> required;  // sorted port names
  double output = 0.0;                // output at the previous step
  std::vector<double> delay_buffer;   // for delay(k)
};

double aggregate(const std::vector<double>& inputs) {
  double sum = 0.0;
  for (double v : inputs) sum += v;
  return sum;
}

double stub_output(ComponentState& state, const std::vector<double>& inputs) {
  const StubSpec& stub = *state.stub;
  switch (stub.kind) {
    case StubSpec::Kind::constant:
      return stub.value;
    case StubSpec::Kind::relay:
      return aggregate(inputs);
    case StubSpec::Kind::sum:
      return aggregate(inputs);
    case StubSpec::Kind::threshold:
      return aggregate(inputs) >= stub.theta ? 1.0 : 0.0;
    case StubSpec::Kind::gate: {
      const double data = inputs.empty() ? 0.0 : inputs[0];
      const double control = inputs.size() > 1 ? inputs[1] : 0.0;
      return control >= 0.5 ? data : 0.0;
    }
    case StubSpec::Kind::delay: {
      // buffer front is the oldest pending input.
      state.delay_buffer.push_back(aggregate(inputs));
      const double out = state.delay_buffer.front();
      state.delay_buffer.erase(state.delay_buffer.begin());
      return out;
    }
    case StubSpec::Kind::table: {
      std::string key;
      key.reserve(inputs.size());
      for (double v : inputs) key.push_back(v >= 0.5 ? '1' : '0');
      auto it = stub.table_entries.find(key);
      if (it == stub.table_entries.end()) {
        throw BraError("table stub on '" + state.component->id +
                       "' has no entry for pattern '" + key + "'");
      }
      return it->second;
    }
  }
  throw BraError("unreachable stub kind");
}

void check_arity(const Component& comp, const StubSpec& stub) {
  if (static_cast<std::size_t>(stub.arity) != comp.provided_ports.size()) {
    throw BraError("stub arity " + std::to_string(stub.arity) +
                   " does not match " +
                   std::to_string(comp.provided_ports.size()) +
                   " provided port(s) of component '" + comp.id + "'");
  }
}

}  // namespace

Trace run(const Hcd& hcd, const StubBindings& bindings,
          const Schedule& schedule, int steps, std::uint64_t seed) {
  if (steps < 1) throw BraError("steps must be >= 1");
  {
    const ValidationReport hcd_report = validate_hcd(hcd);
    if (hcd_report.has_errors()) {
      throw BraError("hcd '" + hcd.id + "' has structural errors: " +
                     hcd_report.findings.front().rule);
    }
  }

  std::map<std::string, ComponentState> states;
  for (const auto& [id, comp] : hcd.components) {
    auto it = bindings.find(id);
    if (it == bindings.end()) {
      throw BraError("unbound component: '" + id + "'");
    }
    check_arity(comp, it->second);
    ComponentState state;
    state.component = &comp;
    state.stub = &it->second;
    for (const auto& p : comp.required_ports) state.required.push_back(p.name);
    std::sort(state.required.begin(), state.required.end());
    if (it->second.kind == StubSpec::Kind::delay) {
      if (it->second.k < 1) {
        throw BraError("delay stub on '" + id + "' needs k >= 1");
      }
      // The one-step update rule already delays by one; buffer the rest so
      // that delay(1) matches a plain relay.
      state.delay_buffer.assign(static_cast<std::size_t>(it->second.k) - 1,
                                0.0);
    }
    states.emplace(id, std::move(state));
  }

  // The schedule must cover every external input for every step.
  for (const auto& ext : hcd.external_inputs) {
    auto it = schedule.find(ext.name);
    if (it == schedule.end()) {
      throw BraError("schedule gap: external input '" + ext.name +
                     "' has no series");
    }
    if (it->second.size() < static_cast<std::size_t>(steps)) {
      throw BraError("schedule gap: external input '" + ext.name +
                     "' covers only " + std::to_string(it->second.size()) +
                     " of " + std::to_string(steps) + " steps");
    }
  }

  Trace trace;
  trace.hcd_id = hcd.id;
  trace.steps = steps;
  trace.seed = seed;
  trace.config_hash = config_fingerprint(hcd, bindings, schedule, steps, seed);

  auto emit = [&](int t, const ComponentState& state) {
    for (const auto& p : state.component->provided_ports) {
      trace.records.push_back({t, state.component->id, p.name, state.output});
    }
  };

  for (auto& [id, state] : states) {
    state.output =
        state.stub->kind == StubSpec::Kind::constant ? state.stub->value : 0.0;
    emit(0, state);
  }

  for (int t = 1; t < steps; ++t) {
    // Gather inputs from the previous step before any output updates.
    std::map<std::string, std::vector<double>> inputs;
    for (const auto& [id, state] : states) {
      inputs[id].assign(state.required.size(), 0.0);
    }
    auto port_slot = [&](const std::string& comp,
                         const std::string& port) -> double* {
      auto& state = states.at(comp);
      auto it = std::lower_bound(state.required.begin(), state.required.end(),
                                 port);
      if (it == state.required.end() || *it != port) return nullptr;
      return &inputs.at(comp)[static_cast<std::size_t>(
          it - state.required.begin())];
    };
    for (const auto& [lid, link] : hcd.links) {
      if (double* slot = port_slot(link.to.component, link.to.port)) {
        *slot += states.at(link.from.component).output;
      }
    }
    for (const auto& ext : hcd.external_inputs) {
      if (double* slot = port_slot(ext.component, ext.port)) {
        *slot += schedule.at(ext.name)[static_cast<std::size_t>(t - 1)];
      }
    }

    for (auto& [id, state] : states) {
      state.output = stub_output(state, inputs.at(id));
    }
    for (auto& [id, state] : states) emit(t, state);
  }

  std::sort(trace.records.begin(), trace.records.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              return std::tie(a.t, a.component, a.port) <
                     std::tie(b.t, b.component, b.port);
            });
  return trace;
}

Hcd ablate(const Hcd& hcd, const std::vector<std::string>& component_ids) {
  for (const auto& id : component_ids) {
    if (!hcd.find_component(id)) {
      throw BraError("unknown component id: '" + id + "'");
    }
  }
  const std::set<std::string> removed(component_ids.begin(),
                                      component_ids.end());

  Hcd result = hcd;
  for (const auto& id : removed) result.components.erase(id);
  std::erase_if(result.links, [&](const auto& entry) {
    const DependencyLink& link = entry.second;
    return removed.contains(link.from.component) ||
           removed.contains(link.to.component);
  });
  std::erase_if(result.external_inputs, [&](const ExternalPort& ext) {
    return removed.contains(ext.component);
  });
  std::erase_if(result.external_outputs, [&](const ExternalPort& ext) {
    return removed.contains(ext.component);
  });
  return result;
}

StubBindings replace_stub(const Hcd& hcd, StubBindings bindings,
                          const std::string& component_id, StubSpec stub) {
  const Component* comp = hcd.find_component(component_id);
  if (!comp) throw BraError("unknown component id: '" + component_id + "'");
  check_arity(*comp, stub);
  bindings[component_id] = std::move(stub);
  return bindings;
}

bool goal_achieved(const GoalPredicate& goal, const Trace& trace,
                   const Schedule& schedule) {
  switch (goal.kind) {
    case GoalPredicate::Kind::none:
      throw BraError("goal predicate '" + goal.id + "' is not machine-checkable");
    case GoalPredicate::Kind::port_active_by: {
      const int t = trace.first_active(goal.component, goal.port);
      return t >= 0 && t <= goal.deadline;
    }
    case GoalPredicate::Kind::port_active_after_input: {
      auto it = schedule.find(goal.input);
      if (it == schedule.end()) {
        throw BraError("goal references unscheduled input '" + goal.input +
                       "'");
      }
      int input_t = -1;
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        if (it->second[i] >= 0.5) {
          input_t = static_cast<int>(i);
          break;
        }
      }
      if (input_t < 0) return false;
      const int t = trace.first_active(goal.component, goal.port);
      return t > input_t && t - input_t <= goal.within;
    }
  }
  return false;
}

}  // namespace bra
