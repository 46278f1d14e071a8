#include "bra/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bra {

using nlohmann::json;

namespace {

// --- low-level helpers ---------------------------------------------------

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_col(text, e.byte), "JSON syntax error: " + std::string(e.what()));
  } catch (const json::exception& e) {
    // e.g. numeric overflow while reading a literal; no byte offset here.
    throw ParseError("/", "JSON error: " + std::string(e.what()));
  }
}

[[noreturn]] void schema_error(const std::string& path, const std::string& detail) {
  throw ParseError(path.empty() ? "/" : path, detail);
}

const json& expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  return j;
}

void check_fields(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  expect_object(obj, path);
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      schema_error(path + "/" + key, "unknown field '" + key + "'");
    }
  }
}

const json* maybe(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string get_string(const json& obj, const std::string& path,
                       const char* key, bool required = true,
                       std::string fallback = "") {
  const json* v = maybe(obj, key);
  if (!v) {
    if (required) schema_error(path, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!v->is_string()) {
    schema_error(path + "/" + key, "expected a string");
  }
  return v->get<std::string>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  const json* v = maybe(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) schema_error(path + "/" + key, "expected a boolean");
  return v->get<bool>();
}

std::int64_t get_int(const json& obj, const std::string& path, const char* key,
                     bool required = true, std::int64_t fallback = 0) {
  const json* v = maybe(obj, key);
  if (!v) {
    if (required) schema_error(path, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!v->is_number_integer()) {
    schema_error(path + "/" + key, "expected an integer");
  }
  return v->get<std::int64_t>();
}

double get_number(const json& obj, const std::string& path, const char* key,
                  bool required = true, double fallback = 0.0) {
  const json* v = maybe(obj, key);
  if (!v) {
    if (required) schema_error(path, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!v->is_number()) schema_error(path + "/" + key, "expected a number");
  return v->get<double>();
}

const json& get_array(const json& obj, const std::string& path, const char* key,
                      bool required = true) {
  static const json empty = json::array();
  const json* v = maybe(obj, key);
  if (!v) {
    if (required) schema_error(path, std::string("missing field '") + key + "'");
    return empty;
  }
  if (!v->is_array()) schema_error(path + "/" + key, "expected an array");
  return *v;
}

void check_envelope(const json& doc, const char* kind) {
  expect_object(doc, "");
  const std::string version = get_string(doc, "", "format_version");
  if (version != kFormatVersion) {
    schema_error("/format_version", "unsupported format_version '" + version + "'");
  }
  const std::string actual = get_string(doc, "", "kind");
  if (actual != kind) {
    schema_error("/kind", std::string("expected kind '") + kind + "', got '" +
                             actual + "'");
  }
}

template <typename Fn>
auto enum_field(const json& obj, const std::string& path, const char* key,
                Fn parser) {
  const std::string text = get_string(obj, path, key, /*required=*/false);
  try {
    return parser(text);
  } catch (const BraError& e) {
    schema_error(path + "/" + key, e.what());
  }
}

std::vector<Citation> parse_references(const json& obj,
                                       const std::string& path) {
  std::vector<Citation> refs;
  for (std::size_t i = 0; i < get_array(obj, path, "references", false).size();
       ++i) {
    const json& r = obj.at("references")[i];
    const std::string rpath = path + "/references[" + std::to_string(i) + "]";
    check_fields(r, rpath, {"text", "peer_reviewed"});
    refs.push_back({get_string(r, rpath, "text"),
                    get_bool(r, rpath, "peer_reviewed", false)});
  }
  return refs;
}

json references_to_json(const std::vector<Citation>& refs) {
  json arr = json::array();
  for (const auto& r : refs) {
    arr.push_back({{"text", r.text}, {"peer_reviewed", r.peer_reviewed}});
  }
  return arr;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BraError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw BraError("cannot write file: " + path);
  out << content;
}

// --- BIF -----------------------------------------------------------------

Bif parse_bif(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "bif");
  check_fields(doc, "", {"format_version", "kind", "metadata", "circuits",
                         "connections"});

  Bif bif;
  if (const json* meta = maybe(doc, "metadata")) {
    check_fields(*meta, "/metadata", {"version", "provenance"});
    bif.metadata.version = get_string(*meta, "/metadata", "version", false);
    bif.metadata.provenance = get_string(*meta, "/metadata", "provenance", false);
  }

  const json& circuits = get_array(doc, "", "circuits");
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    const json& c = circuits[i];
    const std::string path = "/circuits[" + std::to_string(i) + "]";
    check_fields(c, path,
                 {"id", "kind", "label", "species", "transmitter", "sign",
                  "cell_count", "neocortical", "members", "references"});
    CircuitNode node;
    node.id = get_string(c, path, "id");
    const std::string kind = get_string(c, path, "kind", false, "uniform");
    if (kind != "uniform" && kind != "composite") {
      schema_error(path + "/kind", "kind must be 'uniform' or 'composite'");
    }
    node.is_uniform = kind == "uniform";
    node.label = get_string(c, path, "label", false);
    node.species = enum_field(c, path, "species", species_from_string);
    node.neocortical = get_bool(c, path, "neocortical", false);
    node.transmitter = enum_field(c, path, "transmitter", transmitter_from_string);
    node.sign = enum_field(c, path, "sign", sign_from_string);
    if (maybe(c, "cell_count")) {
      const std::int64_t count = get_int(c, path, "cell_count");
      if (count < 0) schema_error(path + "/cell_count", "must be non-negative");
      node.cell_count = static_cast<std::uint64_t>(count);
    }
    if (!node.is_uniform) {
      for (const auto& m : get_array(c, path, "members", false)) {
        if (!m.is_string()) schema_error(path + "/members", "expected strings");
        node.members.push_back(m.get<std::string>());
      }
    } else if (maybe(c, "members")) {
      schema_error(path + "/members", "uniform circuits have no members");
    }
    node.references = parse_references(c, path);
    if (!bif.circuits.emplace(node.id, node).second) {
      schema_error(path + "/id", "duplicate circuit id '" + node.id + "'");
    }
  }

  const json& connections = get_array(doc, "", "connections");
  for (std::size_t i = 0; i < connections.size(); ++i) {
    const json& c = connections[i];
    const std::string path = "/connections[" + std::to_string(i) + "]";
    check_fields(c, path, {"id", "input", "output", "species", "size",
                           "transmitter", "hierarchy", "references"});
    Connection conn;
    conn.id = get_string(c, path, "id");
    conn.input = get_string(c, path, "input");
    conn.output = get_string(c, path, "output");
    conn.species = enum_field(c, path, "species", species_from_string);
    conn.transmitter = enum_field(c, path, "transmitter", transmitter_from_string);
    conn.hierarchy = enum_field(c, path, "hierarchy", hierarchy_from_string);
    if (maybe(c, "size")) {
      const std::int64_t size = get_int(c, path, "size");
      if (size < 0) schema_error(path + "/size", "must be non-negative");
      conn.size = static_cast<std::uint64_t>(size);
    }
    conn.references = parse_references(c, path);
    if (!bif.connections.emplace(conn.id, conn).second) {
      schema_error(path + "/id", "duplicate connection id '" + conn.id + "'");
    }
  }

  return bif;
}

std::string serialize_bif(const Bif& bif) {
  json circuits = json::array();
  for (const auto& [id, node] : bif.circuits) {
    json c = {{"id", node.id},
              {"kind", node.is_uniform ? "uniform" : "composite"},
              {"label", node.label},
              {"species", std::string(to_string(node.species))},
              {"neocortical", node.neocortical},
              {"references", references_to_json(node.references)}};
    if (node.is_uniform) {
      c["transmitter"] = std::string(to_string(node.transmitter));
      c["sign"] = std::string(to_string(node.sign));
      if (node.cell_count) c["cell_count"] = *node.cell_count;
    } else {
      c["members"] = node.members;
    }
    circuits.push_back(std::move(c));
  }
  json connections = json::array();
  for (const auto& [id, conn] : bif.connections) {
    json c = {{"id", conn.id},
              {"input", conn.input},
              {"output", conn.output},
              {"species", std::string(to_string(conn.species))},
              {"transmitter", std::string(to_string(conn.transmitter))},
              {"hierarchy", std::string(to_string(conn.hierarchy))},
              {"references", references_to_json(conn.references)}};
    if (conn.size) c["size"] = *conn.size;
    connections.push_back(std::move(c));
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "bif"},
                         {"metadata",
                          {{"version", bif.metadata.version},
                           {"provenance", bif.metadata.provenance}}},
                         {"circuits", circuits},
                         {"connections", connections}});
}

// --- goal predicates -----------------------------------------------------

namespace {

GoalPredicate parse_goal(const json& g, const std::string& path) {
  check_fields(g, path, {"id", "type", "component", "port", "deadline",
                         "input", "within"});
  GoalPredicate goal;
  goal.id = get_string(g, path, "id", false);
  const std::string type = get_string(g, path, "type");
  if (type == "port-active-by") {
    goal.kind = GoalPredicate::Kind::port_active_by;
    goal.component = get_string(g, path, "component");
    goal.port = get_string(g, path, "port");
    goal.deadline = static_cast<int>(get_int(g, path, "deadline"));
  } else if (type == "port-active-after-input") {
    goal.kind = GoalPredicate::Kind::port_active_after_input;
    goal.component = get_string(g, path, "component");
    goal.port = get_string(g, path, "port");
    goal.input = get_string(g, path, "input");
    goal.within = static_cast<int>(get_int(g, path, "within"));
  } else {
    schema_error(path + "/type", "unknown goal type '" + type + "'");
  }
  return goal;
}

json goal_to_json(const GoalPredicate& goal) {
  json g = {{"id", goal.id}};
  switch (goal.kind) {
    case GoalPredicate::Kind::port_active_by:
      g["type"] = "port-active-by";
      g["component"] = goal.component;
      g["port"] = goal.port;
      g["deadline"] = goal.deadline;
      break;
    case GoalPredicate::Kind::port_active_after_input:
      g["type"] = "port-active-after-input";
      g["component"] = goal.component;
      g["port"] = goal.port;
      g["input"] = goal.input;
      g["within"] = goal.within;
      break;
    case GoalPredicate::Kind::none:
      break;
  }
  return g;
}

std::vector<PortSpec> parse_ports(const json& obj, const std::string& path,
                                  const char* key) {
  std::vector<PortSpec> ports;
  const json& arr = get_array(obj, path, key, false);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ppath =
        path + "/" + key + "[" + std::to_string(i) + "]";
    check_fields(arr[i], ppath, {"name", "signal_semantics"});
    ports.push_back({get_string(arr[i], ppath, "name"),
                     get_string(arr[i], ppath, "signal_semantics", false)});
  }
  return ports;
}

json ports_to_json(const std::vector<PortSpec>& ports) {
  json arr = json::array();
  for (const auto& p : ports) {
    arr.push_back({{"name", p.name}, {"signal_semantics", p.signal_semantics}});
  }
  return arr;
}

std::vector<ExternalPort> parse_externals(const json& obj,
                                          const std::string& path,
                                          const char* key) {
  std::vector<ExternalPort> externals;
  const json& arr = get_array(obj, path, key, false);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string epath = path + "/" + key + "[" + std::to_string(i) + "]";
    check_fields(arr[i], epath, {"name", "component", "port"});
    externals.push_back({get_string(arr[i], epath, "name"),
                         get_string(arr[i], epath, "component"),
                         get_string(arr[i], epath, "port")});
  }
  return externals;
}

json externals_to_json(const std::vector<ExternalPort>& externals) {
  json arr = json::array();
  for (const auto& e : externals) {
    arr.push_back(
        {{"name", e.name}, {"component", e.component}, {"port", e.port}});
  }
  return arr;
}

}  // namespace

// --- HCD -----------------------------------------------------------------

Hcd parse_hcd(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "hcd");
  check_fields(doc, "", {"format_version", "kind", "id", "tlf", "fragment",
                         "components", "links", "external_inputs",
                         "external_outputs"});

  Hcd hcd;
  hcd.id = get_string(doc, "", "id");
  hcd.fragment = get_bool(doc, "", "fragment", false);
  if (const json* tlf = maybe(doc, "tlf")) {
    check_fields(*tlf, "/tlf", {"goal", "predicate"});
    hcd.tlf.goal = get_string(*tlf, "/tlf", "goal", false);
    if (const json* predicate = maybe(*tlf, "predicate")) {
      hcd.tlf.predicate = parse_goal(*predicate, "/tlf/predicate");
    }
  }

  const json& components = get_array(doc, "", "components");
  for (std::size_t i = 0; i < components.size(); ++i) {
    const json& c = components[i];
    const std::string path = "/components[" + std::to_string(i) + "]";
    check_fields(c, path,
                 {"id", "function_label", "provided_ports", "required_ports",
                  "behavior_claims", "stub_ref"});
    Component comp;
    comp.id = get_string(c, path, "id");
    comp.function_label = get_string(c, path, "function_label", false);
    comp.provided_ports = parse_ports(c, path, "provided_ports");
    comp.required_ports = parse_ports(c, path, "required_ports");
    const json& claims = get_array(c, path, "behavior_claims", false);
    for (std::size_t k = 0; k < claims.size(); ++k) {
      const std::string cpath =
          path + "/behavior_claims[" + std::to_string(k) + "]";
      check_fields(claims[k], cpath, {"claim", "sign"});
      BehaviorClaim claim;
      claim.claim = get_string(claims[k], cpath, "claim");
      if (maybe(claims[k], "sign")) {
        claim.sign = enum_field(claims[k], cpath, "sign", sign_from_string);
      }
      comp.behavior_claims.push_back(std::move(claim));
    }
    if (maybe(c, "stub_ref")) comp.stub_ref = get_string(c, path, "stub_ref");
    if (!hcd.components.emplace(comp.id, comp).second) {
      schema_error(path + "/id", "duplicate component id '" + comp.id + "'");
    }
  }

  const json& links = get_array(doc, "", "links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const json& l = links[i];
    const std::string path = "/links[" + std::to_string(i) + "]";
    check_fields(l, path, {"id", "from", "to", "signal_semantics"});
    DependencyLink link;
    link.id = get_string(l, path, "id");
    auto parse_ref = [&](const char* key) -> PortRef {
      const json* r = maybe(l, key);
      if (!r) schema_error(path, std::string("missing field '") + key + "'");
      check_fields(*r, path + "/" + key, {"component", "port"});
      return {get_string(*r, path + "/" + key, "component"),
              get_string(*r, path + "/" + key, "port")};
    };
    link.from = parse_ref("from");
    link.to = parse_ref("to");
    link.signal_semantics = get_string(l, path, "signal_semantics", false);
    if (!hcd.links.emplace(link.id, link).second) {
      schema_error(path + "/id", "duplicate link id '" + link.id + "'");
    }
  }

  hcd.external_inputs = parse_externals(doc, "", "external_inputs");
  hcd.external_outputs = parse_externals(doc, "", "external_outputs");
  return hcd;
}

std::string serialize_hcd(const Hcd& hcd) {
  json components = json::array();
  for (const auto& [id, comp] : hcd.components) {
    json claims = json::array();
    for (const auto& claim : comp.behavior_claims) {
      json c = {{"claim", claim.claim}};
      if (claim.sign) c["sign"] = std::string(to_string(*claim.sign));
      claims.push_back(std::move(c));
    }
    json c = {{"id", comp.id},
              {"function_label", comp.function_label},
              {"provided_ports", ports_to_json(comp.provided_ports)},
              {"required_ports", ports_to_json(comp.required_ports)},
              {"behavior_claims", claims}};
    if (comp.stub_ref) c["stub_ref"] = *comp.stub_ref;
    components.push_back(std::move(c));
  }
  json links = json::array();
  for (const auto& [id, link] : hcd.links) {
    links.push_back({{"id", link.id},
                     {"from",
                      {{"component", link.from.component},
                       {"port", link.from.port}}},
                     {"to",
                      {{"component", link.to.component},
                       {"port", link.to.port}}},
                     {"signal_semantics", link.signal_semantics}});
  }
  json tlf = {{"goal", hcd.tlf.goal}};
  if (hcd.tlf.predicate.kind != GoalPredicate::Kind::none) {
    tlf["predicate"] = goal_to_json(hcd.tlf.predicate);
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "hcd"},
                         {"id", hcd.id},
                         {"tlf", tlf},
                         {"fragment", hcd.fragment},
                         {"components", components},
                         {"links", links},
                         {"external_inputs", externals_to_json(hcd.external_inputs)},
                         {"external_outputs", externals_to_json(hcd.external_outputs)}});
}

// --- mapping -------------------------------------------------------------

BraMapping parse_mapping(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "mapping");
  check_fields(doc, "", {"format_version", "kind", "hcd_id", "bif_id", "roi",
                         "component_map", "link_map", "evidence"});
  BraMapping mapping;
  mapping.hcd_id = get_string(doc, "", "hcd_id");
  mapping.bif_id = get_string(doc, "", "bif_id");
  for (const auto& r : get_array(doc, "", "roi", false)) {
    if (!r.is_string()) schema_error("/roi", "expected strings");
    mapping.roi.insert(r.get<std::string>());
  }
  if (const json* cmap = maybe(doc, "component_map")) {
    expect_object(*cmap, "/component_map");
    for (const auto& [key, value] : cmap->items()) {
      if (!value.is_string()) {
        schema_error("/component_map/" + key, "expected a string");
      }
      mapping.component_map[key] = value.get<std::string>();
    }
  }
  if (const json* lmap = maybe(doc, "link_map")) {
    expect_object(*lmap, "/link_map");
    for (const auto& [key, value] : lmap->items()) {
      if (!value.is_string()) {
        schema_error("/link_map/" + key, "expected a string");
      }
      mapping.link_map[key] = value.get<std::string>();
    }
  }
  if (const json* evidence = maybe(doc, "evidence")) {
    expect_object(*evidence, "/evidence");
    for (const auto& [key, value] : evidence->items()) {
      if (!value.is_array()) {
        schema_error("/evidence/" + key, "expected an array");
      }
      std::vector<Citation> refs;
      for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string path =
            "/evidence/" + key + "[" + std::to_string(i) + "]";
        check_fields(value[i], path, {"text", "peer_reviewed"});
        refs.push_back({get_string(value[i], path, "text"),
                        get_bool(value[i], path, "peer_reviewed", false)});
      }
      mapping.evidence[key] = std::move(refs);
    }
  }
  return mapping;
}

std::string serialize_mapping(const BraMapping& mapping) {
  json evidence = json::object();
  for (const auto& [key, refs] : mapping.evidence) {
    evidence[key] = references_to_json(refs);
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "mapping"},
                         {"hcd_id", mapping.hcd_id},
                         {"bif_id", mapping.bif_id},
                         {"roi", mapping.roi},
                         {"component_map", mapping.component_map},
                         {"link_map", mapping.link_map},
                         {"evidence", evidence}});
}

// --- template ------------------------------------------------------------

FunctionTemplate parse_template(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "template");
  check_fields(doc, "", {"format_version", "kind", "id", "tlf_goal", "roles",
                         "role_edges", "externals"});
  FunctionTemplate tmpl;
  tmpl.id = get_string(doc, "", "id");
  tmpl.tlf_goal = get_string(doc, "", "tlf_goal", false);

  const json& roles = get_array(doc, "", "roles");
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const json& r = roles[i];
    const std::string path = "/roles[" + std::to_string(i) + "]";
    check_fields(r, path, {"id", "function_label", "allowed_signs",
                           "allowed_transmitters", "min_cell_count"});
    Role role;
    role.id = get_string(r, path, "id");
    role.function_label = get_string(r, path, "function_label", false);
    for (const auto& s : get_array(r, path, "allowed_signs", false)) {
      if (!s.is_string()) schema_error(path + "/allowed_signs", "expected strings");
      role.constraint.allowed_signs.insert(
          sign_from_string(s.get<std::string>()));
    }
    for (const auto& t : get_array(r, path, "allowed_transmitters", false)) {
      if (!t.is_string()) {
        schema_error(path + "/allowed_transmitters", "expected strings");
      }
      role.constraint.allowed_transmitters.insert(
          transmitter_from_string(t.get<std::string>()));
    }
    if (maybe(r, "min_cell_count")) {
      role.constraint.min_cell_count =
          static_cast<std::uint64_t>(get_int(r, path, "min_cell_count"));
    }
    tmpl.roles.push_back(std::move(role));
  }

  const json& edges = get_array(doc, "", "role_edges", false);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    const std::string path = "/role_edges[" + std::to_string(i) + "]";
    check_fields(e, path, {"from", "to", "required_sign", "max_path_len",
                           "signal_semantics"});
    RoleEdge edge;
    edge.from = get_string(e, path, "from");
    edge.to = get_string(e, path, "to");
    if (maybe(e, "required_sign")) {
      edge.constraint.required_sign =
          enum_field(e, path, "required_sign", sign_from_string);
    }
    edge.constraint.max_path_len =
        static_cast<int>(get_int(e, path, "max_path_len", false, 1));
    edge.constraint.signal_semantics =
        get_string(e, path, "signal_semantics", false);
    tmpl.role_edges.push_back(std::move(edge));
  }

  const json& externals = get_array(doc, "", "externals", false);
  for (std::size_t i = 0; i < externals.size(); ++i) {
    const json& e = externals[i];
    const std::string path = "/externals[" + std::to_string(i) + "]";
    check_fields(e, path, {"role", "direction", "name"});
    ExternalBinding binding;
    binding.role = get_string(e, path, "role");
    const std::string direction = get_string(e, path, "direction");
    if (direction == "afferent") {
      binding.direction = ExternalDirection::afferent;
    } else if (direction == "efferent") {
      binding.direction = ExternalDirection::efferent;
    } else {
      schema_error(path + "/direction", "must be 'afferent' or 'efferent'");
    }
    binding.name = get_string(e, path, "name");
    tmpl.externals.push_back(std::move(binding));
  }

  return tmpl;
}

std::string serialize_template(const FunctionTemplate& tmpl) {
  json roles = json::array();
  for (const auto& role : tmpl.roles) {
    json signs = json::array();
    for (Sign s : role.constraint.allowed_signs) {
      signs.push_back(std::string(to_string(s)));
    }
    json transmitters = json::array();
    for (Transmitter t : role.constraint.allowed_transmitters) {
      transmitters.push_back(std::string(to_string(t)));
    }
    json r = {{"id", role.id},
              {"function_label", role.function_label},
              {"allowed_signs", signs},
              {"allowed_transmitters", transmitters}};
    if (role.constraint.min_cell_count) {
      r["min_cell_count"] = *role.constraint.min_cell_count;
    }
    roles.push_back(std::move(r));
  }
  json edges = json::array();
  for (const auto& edge : tmpl.role_edges) {
    json e = {{"from", edge.from},
              {"to", edge.to},
              {"max_path_len", edge.constraint.max_path_len},
              {"signal_semantics", edge.constraint.signal_semantics}};
    if (edge.constraint.required_sign) {
      e["required_sign"] = std::string(to_string(*edge.constraint.required_sign));
    }
    edges.push_back(std::move(e));
  }
  json externals = json::array();
  for (const auto& binding : tmpl.externals) {
    externals.push_back(
        {{"role", binding.role},
         {"direction", binding.direction == ExternalDirection::afferent
                           ? "afferent"
                           : "efferent"},
         {"name", binding.name}});
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "template"},
                         {"id", tmpl.id},
                         {"tlf_goal", tmpl.tlf_goal},
                         {"roles", roles},
                         {"role_edges", edges},
                         {"externals", externals}});
}

// --- rejection rules & predicates ----------------------------------------

namespace {

RejectionPredicate parse_predicate(const json& p, const std::string& path) {
  check_fields(p, path, {"kind", "negate", "role", "attribute", "values",
                         "role_a", "role_b", "circuit", "max_len"});
  RejectionPredicate predicate;
  predicate.negate = get_bool(p, path, "negate", false);
  const std::string kind = get_string(p, path, "kind");
  if (kind == "role-attribute") {
    predicate.kind = RejectionPredicate::Kind::role_attribute;
    predicate.role = get_string(p, path, "role");
    predicate.attribute = get_string(p, path, "attribute");
    for (const auto& v : get_array(p, path, "values")) {
      if (!v.is_string()) schema_error(path + "/values", "expected strings");
      predicate.values.insert(v.get<std::string>());
    }
  } else if (kind == "co-location") {
    predicate.kind = RejectionPredicate::Kind::co_location;
    predicate.role_a = get_string(p, path, "role_a");
    predicate.role_b = get_string(p, path, "role_b");
    predicate.circuit = get_string(p, path, "circuit");
  } else if (kind == "path-exists") {
    predicate.kind = RejectionPredicate::Kind::path_exists;
    predicate.role_a = get_string(p, path, "role_a");
    predicate.role_b = get_string(p, path, "role_b");
    predicate.max_len = static_cast<int>(get_int(p, path, "max_len", false, 1));
  } else {
    schema_error(path + "/kind", "unknown predicate kind '" + kind + "'");
  }
  return predicate;
}

json predicate_to_json(const RejectionPredicate& p) {
  json out = {{"negate", p.negate}};
  switch (p.kind) {
    case RejectionPredicate::Kind::role_attribute:
      out["kind"] = "role-attribute";
      out["role"] = p.role;
      out["attribute"] = p.attribute;
      out["values"] = p.values;
      break;
    case RejectionPredicate::Kind::co_location:
      out["kind"] = "co-location";
      out["role_a"] = p.role_a;
      out["role_b"] = p.role_b;
      out["circuit"] = p.circuit;
      break;
    case RejectionPredicate::Kind::path_exists:
      out["kind"] = "path-exists";
      out["role_a"] = p.role_a;
      out["role_b"] = p.role_b;
      out["max_len"] = p.max_len;
      break;
  }
  return out;
}

}  // namespace

std::vector<RejectionRule> parse_rules(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "rules");
  check_fields(doc, "", {"format_version", "kind", "rules"});

  std::vector<RejectionRule> rules;
  const json& arr = get_array(doc, "", "rules");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& r = arr[i];
    const std::string path = "/rules[" + std::to_string(i) + "]";
    check_fields(r, path, {"id", "description", "field", "predicate",
                           "citation"});
    RejectionRule rule;
    rule.id = get_string(r, path, "id");
    rule.description = get_string(r, path, "description", false);
    rule.field = enum_field(r, path, "field", finding_field_from_string);
    const json* predicate = maybe(r, "predicate");
    if (!predicate) schema_error(path, "missing field 'predicate'");
    rule.predicate = parse_predicate(*predicate, path + "/predicate");
    const json* citation = maybe(r, "citation");
    if (!citation) schema_error(path, "missing field 'citation'");
    check_fields(*citation, path + "/citation", {"text", "peer_reviewed"});
    rule.citation = {get_string(*citation, path + "/citation", "text"),
                     get_bool(*citation, path + "/citation", "peer_reviewed",
                              false)};
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::string serialize_rules(const std::vector<RejectionRule>& rules) {
  json arr = json::array();
  for (const auto& rule : rules) {
    arr.push_back({{"id", rule.id},
                   {"description", rule.description},
                   {"field", std::string(to_string(rule.field))},
                   {"predicate", predicate_to_json(rule.predicate)},
                   {"citation",
                    {{"text", rule.citation.text},
                     {"peer_reviewed", rule.citation.peer_reviewed}}}});
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "rules"},
                         {"rules", arr}});
}

// --- stubs ---------------------------------------------------------------

StubBindings parse_stubs(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "stubs");
  check_fields(doc, "", {"format_version", "kind", "bindings"});

  StubBindings bindings;
  const json* map = maybe(doc, "bindings");
  if (!map) schema_error("", "missing field 'bindings'");
  expect_object(*map, "/bindings");
  for (const auto& [component, s] : map->items()) {
    const std::string path = "/bindings/" + component;
    check_fields(s, path, {"kind", "value", "k", "theta", "table", "arity"});
    StubSpec stub;
    const std::string kind = get_string(s, path, "kind");
    if (kind == "constant") {
      stub.kind = StubSpec::Kind::constant;
      stub.value = get_number(s, path, "value");
    } else if (kind == "relay") {
      stub.kind = StubSpec::Kind::relay;
    } else if (kind == "delay") {
      stub.kind = StubSpec::Kind::delay;
      stub.k = static_cast<int>(get_int(s, path, "k"));
      if (stub.k < 1) schema_error(path + "/k", "k must be >= 1");
    } else if (kind == "sum") {
      stub.kind = StubSpec::Kind::sum;
    } else if (kind == "threshold") {
      stub.kind = StubSpec::Kind::threshold;
      stub.theta = get_number(s, path, "theta");
    } else if (kind == "gate") {
      stub.kind = StubSpec::Kind::gate;
    } else if (kind == "table") {
      stub.kind = StubSpec::Kind::table;
      const json* table = maybe(s, "table");
      if (!table) schema_error(path, "missing field 'table'");
      expect_object(*table, path + "/table");
      std::size_t width = 0;
      for (const auto& [pattern, value] : table->items()) {
        if (pattern.find_first_not_of("01") != std::string::npos) {
          schema_error(path + "/table", "patterns must be bit strings");
        }
        if (width == 0) width = pattern.size();
        if (pattern.size() != width) {
          schema_error(path + "/table", "patterns must share one width");
        }
        if (!value.is_number()) {
          schema_error(path + "/table/" + pattern, "expected a number");
        }
        stub.table_entries[pattern] = value.get<double>();
      }
      // Total over the declared input alphabet.
      if (stub.table_entries.size() != (std::size_t{1} << width)) {
        schema_error(path + "/table", "table must cover all 2^n patterns");
      }
    } else {
      schema_error(path + "/kind", "unknown stub kind '" + kind + "'");
    }
    stub.arity = static_cast<int>(get_int(s, path, "arity", false, 1));
    bindings.emplace(component, std::move(stub));
  }
  return bindings;
}

std::string serialize_stubs(const StubBindings& bindings) {
  json map = json::object();
  for (const auto& [component, stub] : bindings) {
    json s = {{"arity", stub.arity}};
    switch (stub.kind) {
      case StubSpec::Kind::constant:
        s["kind"] = "constant";
        s["value"] = stub.value;
        break;
      case StubSpec::Kind::relay:
        s["kind"] = "relay";
        break;
      case StubSpec::Kind::delay:
        s["kind"] = "delay";
        s["k"] = stub.k;
        break;
      case StubSpec::Kind::sum:
        s["kind"] = "sum";
        break;
      case StubSpec::Kind::threshold:
        s["kind"] = "threshold";
        s["theta"] = stub.theta;
        break;
      case StubSpec::Kind::gate:
        s["kind"] = "gate";
        break;
      case StubSpec::Kind::table:
        s["kind"] = "table";
        s["table"] = stub.table_entries;
        break;
    }
    map[component] = std::move(s);
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "stubs"},
                         {"bindings", map}});
}

// --- impl graph / fidelity inputs ----------------------------------------

ImplGraph parse_impl(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "impl");
  check_fields(doc, "", {"format_version", "kind", "nodes", "edges", "mapping"});
  ImplGraph impl;
  for (const auto& n : get_array(doc, "", "nodes")) {
    if (!n.is_string()) schema_error("/nodes", "expected strings");
    impl.nodes.insert(n.get<std::string>());
  }
  const json& edges = get_array(doc, "", "edges", false);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges[" + std::to_string(i) + "]";
    if (!edges[i].is_array() || edges[i].size() != 2 ||
        !edges[i][0].is_string() || !edges[i][1].is_string()) {
      schema_error(path, "expected a [from, to] string pair");
    }
    impl.edges.emplace_back(edges[i][0].get<std::string>(),
                            edges[i][1].get<std::string>());
  }
  if (const json* mapping = maybe(doc, "mapping")) {
    expect_object(*mapping, "/mapping");
    for (const auto& [key, value] : mapping->items()) {
      if (!value.is_string()) {
        schema_error("/mapping/" + key, "expected a string");
      }
      impl.mapping[key] = value.get<std::string>();
    }
  }
  return impl;
}

std::string serialize_impl(const ImplGraph& impl) {
  json edges = json::array();
  for (const auto& [a, b] : impl.edges) edges.push_back({a, b});
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "impl"},
                         {"nodes", impl.nodes},
                         {"edges", edges},
                         {"mapping", impl.mapping}});
}

std::vector<BehaviorConstraint> parse_constraints(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "constraints");
  check_fields(doc, "", {"format_version", "kind", "constraints"});
  std::vector<BehaviorConstraint> constraints;
  const json& arr = get_array(doc, "", "constraints");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/constraints[" + std::to_string(i) + "]";
    check_fields(arr[i], path, {"link", "type", "k"});
    BehaviorConstraint c;
    c.link_id = get_string(arr[i], path, "link");
    const std::string type = get_string(arr[i], path, "type");
    if (type == "before") {
      c.kind = BehaviorConstraint::Kind::before;
    } else if (type == "within") {
      c.kind = BehaviorConstraint::Kind::within;
      c.k = static_cast<int>(get_int(arr[i], path, "k"));
    } else {
      schema_error(path + "/type", "unknown constraint type '" + type + "'");
    }
    constraints.push_back(std::move(c));
  }
  return constraints;
}

std::vector<PairingEntry> parse_pairing(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "pairing");
  check_fields(doc, "", {"format_version", "kind", "pairs"});
  std::vector<PairingEntry> pairing;
  const json& arr = get_array(doc, "", "pairs");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/pairs[" + std::to_string(i) + "]";
    check_fields(arr[i], path, {"component", "port", "ref_component", "ref_port"});
    pairing.push_back({get_string(arr[i], path, "component"),
                       get_string(arr[i], path, "port"),
                       get_string(arr[i], path, "ref_component"),
                       get_string(arr[i], path, "ref_port")});
  }
  return pairing;
}

std::vector<Task> parse_tasks(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "tasks");
  check_fields(doc, "", {"format_version", "kind", "tasks"});
  std::vector<Task> tasks;
  const json& arr = get_array(doc, "", "tasks");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& t = arr[i];
    const std::string path = "/tasks[" + std::to_string(i) + "]";
    check_fields(t, path, {"name", "steps", "seed", "schedule", "goal"});
    Task task;
    task.name = get_string(t, path, "name");
    task.steps = static_cast<int>(get_int(t, path, "steps"));
    task.seed = static_cast<std::uint64_t>(get_int(t, path, "seed", false, 0));
    const json* schedule = maybe(t, "schedule");
    if (!schedule) schema_error(path, "missing field 'schedule'");
    expect_object(*schedule, path + "/schedule");
    for (const auto& [input, series] : schedule->items()) {
      if (!series.is_array()) {
        schema_error(path + "/schedule/" + input, "expected an array");
      }
      std::vector<double> values;
      for (const auto& v : series) {
        if (!v.is_number()) {
          schema_error(path + "/schedule/" + input, "expected numbers");
        }
        values.push_back(v.get<double>());
      }
      task.schedule[input] = std::move(values);
    }
    const json* goal = maybe(t, "goal");
    if (!goal) schema_error(path, "missing field 'goal'");
    task.goal = parse_goal(*goal, path + "/goal");
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<SoftConstraint> parse_soft_constraints(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "soft");
  check_fields(doc, "", {"format_version", "kind", "constraints"});
  std::vector<SoftConstraint> constraints;
  const json& arr = get_array(doc, "", "constraints");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& c = arr[i];
    const std::string path = "/constraints[" + std::to_string(i) + "]";
    check_fields(c, path, {"id", "weight", "predicate"});
    SoftConstraint soft;
    soft.id = get_string(c, path, "id");
    soft.weight = get_number(c, path, "weight");
    const json* predicate = maybe(c, "predicate");
    if (!predicate) schema_error(path, "missing field 'predicate'");
    soft.predicate = parse_predicate(*predicate, path + "/predicate");
    constraints.push_back(std::move(soft));
  }
  return constraints;
}

std::vector<Milestone> parse_milestones(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "milestones");
  check_fields(doc, "", {"format_version", "kind", "milestones"});
  std::vector<Milestone> milestones;
  const json& arr = get_array(doc, "", "milestones");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/milestones[" + std::to_string(i) + "]";
    check_fields(arr[i], path, {"component", "event"});
    milestones.push_back({get_string(arr[i], path, "component"),
                          get_string(arr[i], path, "event")});
  }
  return milestones;
}

// --- candidate sets ------------------------------------------------------

CandidateSet parse_candidates(const std::string& text) {
  const json doc = parse_json(text);
  check_envelope(doc, "candidates");
  check_fields(doc, "", {"format_version", "kind", "template_id", "truncated",
                         "candidates"});
  CandidateSet set;
  set.template_id = get_string(doc, "", "template_id", false);
  set.truncated = get_bool(doc, "", "truncated", false);
  const json& arr = get_array(doc, "", "candidates");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& c = arr[i];
    const std::string path = "/candidates[" + std::to_string(i) + "]";
    check_fields(c, path, {"assignment", "realized_edges", "status",
                           "rejected_by", "score"});
    CandidateHcd candidate;
    const json* assignment = maybe(c, "assignment");
    if (!assignment) schema_error(path, "missing field 'assignment'");
    expect_object(*assignment, path + "/assignment");
    for (const auto& [role, circuit] : assignment->items()) {
      if (!circuit.is_string()) {
        schema_error(path + "/assignment/" + role, "expected a string");
      }
      candidate.assignment[role] = circuit.get<std::string>();
    }
    if (const json* realized = maybe(c, "realized_edges")) {
      expect_object(*realized, path + "/realized_edges");
      for (const auto& [index, connections] : realized->items()) {
        if (!connections.is_array()) {
          schema_error(path + "/realized_edges/" + index, "expected an array");
        }
        std::vector<std::string> ids;
        for (const auto& id : connections) {
          if (!id.is_string()) {
            schema_error(path + "/realized_edges/" + index, "expected strings");
          }
          ids.push_back(id.get<std::string>());
        }
        candidate.realized_edges[std::stoul(index)] = std::move(ids);
      }
    }
    const std::string status = get_string(c, path, "status", false, "surviving");
    if (status == "surviving") {
      candidate.status = CandidateHcd::Status::surviving;
    } else if (status == "rejected") {
      candidate.status = CandidateHcd::Status::rejected;
    } else {
      schema_error(path + "/status", "unknown status '" + status + "'");
    }
    candidate.rejected_by = get_string(c, path, "rejected_by", false);
    candidate.score = get_number(c, path, "score", false, 0.0);
    set.candidates.push_back(std::move(candidate));
  }
  return set;
}

std::string serialize_candidates(const CandidateSet& set) {
  json arr = json::array();
  for (const auto& candidate : set.candidates) {
    json realized = json::object();
    for (const auto& [index, path] : candidate.realized_edges) {
      realized[std::to_string(index)] = path;
    }
    arr.push_back(
        {{"assignment", candidate.assignment},
         {"realized_edges", realized},
         {"status", candidate.status == CandidateHcd::Status::surviving
                        ? "surviving"
                        : "rejected"},
         {"rejected_by", candidate.rejected_by},
         {"score", candidate.score}});
  }
  return dump_canonical({{"format_version", kFormatVersion},
                         {"kind", "candidates"},
                         {"template_id", set.template_id},
                         {"truncated", set.truncated},
                         {"candidates", arr}});
}

// --- CSV -----------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

double parse_double(const std::string& text, const std::string& where) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError(where, "expected a number, got '" + text + "'");
  }
}

int parse_int(const std::string& text, const std::string& where) {
  try {
    std::size_t consumed = 0;
    const int value = std::stoi(text, &consumed);
    if (consumed != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ParseError(where, "expected an integer, got '" + text + "'");
  }
}

}  // namespace

Schedule parse_schedule_csv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != "t,input,value") {
    throw ParseError("line 1", "expected header 't,input,value'");
  }

  std::map<std::string, std::map<int, double>> grid;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    const auto fields = split(lines[i], ',');
    if (fields.size() != 3) throw ParseError(where, "expected 3 fields");
    const int t = parse_int(fields[0], where);
    if (t < 0) throw ParseError(where, "step must be non-negative");
    if (!grid[fields[1]].emplace(t, parse_double(fields[2], where)).second) {
      throw ParseError(where, "duplicate entry for (t=" + fields[0] +
                                  ", input='" + fields[1] + "')");
    }
  }

  Schedule schedule;
  for (const auto& [input, series] : grid) {
    const int max_t = series.rbegin()->first;
    std::vector<double> values(static_cast<std::size_t>(max_t) + 1, 0.0);
    for (int t = 0; t <= max_t; ++t) {
      auto it = series.find(t);
      if (it == series.end()) {
        throw ParseError("input '" + input + "'",
                         "schedule gap at step " + std::to_string(t));
      }
      values[static_cast<std::size_t>(t)] = it->second;
    }
    schedule[input] = std::move(values);
  }
  return schedule;
}

std::string serialize_schedule_csv(const Schedule& schedule, int steps) {
  std::ostringstream os;
  os << "t,input,value\n";
  for (int t = 0; t < steps; ++t) {
    for (const auto& [input, series] : schedule) {
      const double value = static_cast<std::size_t>(t) < series.size()
                               ? series[static_cast<std::size_t>(t)]
                               : 0.0;
      os << t << ',' << input << ',' << format_value(value) << '\n';
    }
  }
  return os.str();
}

std::string serialize_trace_csv(const Trace& trace) {
  std::ostringstream os;
  os << "t,component,port,value\n";
  for (const auto& r : trace.records) {
    os << r.t << ',' << r.component << ',' << r.port << ','
       << format_value(r.value) << '\n';
  }
  return os.str();
}

Trace parse_trace_csv(const std::string& text) {
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty() || lines[0] != "t,component,port,value") {
    throw ParseError("line 1", "expected header 't,component,port,value'");
  }
  Trace trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    const auto fields = split(lines[i], ',');
    if (fields.size() != 4) throw ParseError(where, "expected 4 fields");
    TraceRecord record;
    record.t = parse_int(fields[0], where);
    record.component = fields[1];
    record.port = fields[2];
    record.value = parse_double(fields[3], where);
    trace.steps = std::max(trace.steps, record.t + 1);
    trace.records.push_back(std::move(record));
  }
  std::sort(trace.records.begin(), trace.records.end(),
            [](const TraceRecord& a, const TraceRecord& b) {
              return std::tie(a.t, a.component, a.port) <
                     std::tie(b.t, b.component, b.port);
            });
  return trace;
}

// --- TSV ingestion -------------------------------------------------------

namespace {

struct TsvSheet {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

TsvSheet parse_tsv(const std::string& text, const std::string& sheet,
                   const std::vector<std::string>& required_columns) {
  TsvSheet result;
  const std::vector<std::string> lines = lines_of(text);
  if (lines.empty()) {
    throw ParseError(sheet + " line 1", "missing header row");
  }
  result.header = split(lines[0], '\t');
  for (const auto& column : required_columns) {
    if (std::find(result.header.begin(), result.header.end(), column) ==
        result.header.end()) {
      throw ParseError(sheet + " line 1",
                       "missing required column '" + column + "'");
    }
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split(lines[i], '\t');
    fields.resize(result.header.size());
    result.rows.push_back(std::move(fields));
  }
  return result;
}

std::string cell(const TsvSheet& sheet, const std::vector<std::string>& row,
                 const std::string& column) {
  const auto it =
      std::find(sheet.header.begin(), sheet.header.end(), column);
  if (it == sheet.header.end()) return "";
  return row[static_cast<std::size_t>(it - sheet.header.begin())];
}

// Citations are ';'-separated; a leading '!' marks peer review.
std::vector<Citation> cell_references(const std::string& text) {
  std::vector<Citation> refs;
  for (const auto& part : split(text, ';')) {
    if (part.empty()) continue;
    if (part[0] == '!') {
      refs.push_back({part.substr(1), true});
    } else {
      refs.push_back({part, false});
    }
  }
  return refs;
}

}  // namespace

TsvImport import_bif_tsv(const std::string& circuits_tsv,
                         const std::string& connections_tsv) {
  TsvImport result;

  const TsvSheet circuits =
      parse_tsv(circuits_tsv, "circuits", {"id", "kind", "label", "species"});
  for (std::size_t i = 0; i < circuits.rows.size(); ++i) {
    const auto& row = circuits.rows[i];
    const std::string where = "circuits row " + std::to_string(i + 2);
    CircuitNode node;
    node.id = cell(circuits, row, "id");
    if (node.id.empty()) throw ParseError(where, "empty id cell");
    const std::string kind = cell(circuits, row, "kind");
    if (kind != "uniform" && kind != "composite") {
      throw ParseError(where, "kind must be 'uniform' or 'composite'");
    }
    node.is_uniform = kind == "uniform";
    node.label = cell(circuits, row, "label");

    auto enum_cell = [&](const std::string& column, auto parser, auto setter) {
      const std::string value = cell(circuits, row, column);
      if (value.empty()) {
        result.log.push_back(where + ": column '" + column +
                             "' defaulted to unknown");
      }
      try {
        setter(parser(value));
      } catch (const BraError& e) {
        throw ParseError(where + " column '" + column + "'", e.what());
      }
    };
    enum_cell("species", species_from_string,
              [&](Species s) { node.species = s; });
    if (node.is_uniform) {
      enum_cell("transmitter", transmitter_from_string,
                [&](Transmitter t) { node.transmitter = t; });
      enum_cell("sign", sign_from_string, [&](Sign s) { node.sign = s; });
      const std::string count = cell(circuits, row, "cell_count");
      if (!count.empty()) {
        node.cell_count = static_cast<std::uint64_t>(
            parse_int(count, where + " column 'cell_count'"));
      }
    } else {
      for (const auto& member : split(cell(circuits, row, "members"), ';')) {
        if (!member.empty()) node.members.push_back(member);
      }
    }
    node.neocortical = cell(circuits, row, "neocortical") == "true";
    node.references = cell_references(cell(circuits, row, "references"));
    if (!result.bif.circuits.emplace(node.id, node).second) {
      throw ParseError(where, "duplicate circuit id '" + node.id + "'");
    }
  }

  const TsvSheet connections =
      parse_tsv(connections_tsv, "connections", {"id", "input", "output"});
  for (std::size_t i = 0; i < connections.rows.size(); ++i) {
    const auto& row = connections.rows[i];
    const std::string where = "connections row " + std::to_string(i + 2);
    Connection conn;
    conn.id = cell(connections, row, "id");
    if (conn.id.empty()) throw ParseError(where, "empty id cell");
    conn.input = cell(connections, row, "input");
    conn.output = cell(connections, row, "output");
    if (!result.bif.circuits.contains(conn.input)) {
      throw ParseError(where, "input circuit '" + conn.input +
                                  "' is not defined in the circuits sheet");
    }
    if (!result.bif.circuits.contains(conn.output)) {
      throw ParseError(where, "output circuit '" + conn.output +
                                  "' is not defined in the circuits sheet");
    }
    auto enum_cell = [&](const std::string& column, auto parser, auto setter) {
      const std::string value = cell(connections, row, column);
      if (value.empty()) {
        result.log.push_back(where + ": column '" + column +
                             "' defaulted to unknown");
      }
      try {
        setter(parser(value));
      } catch (const BraError& e) {
        throw ParseError(where + " column '" + column + "'", e.what());
      }
    };
    enum_cell("species", species_from_string,
              [&](Species s) { conn.species = s; });
    enum_cell("transmitter", transmitter_from_string,
              [&](Transmitter t) { conn.transmitter = t; });
    enum_cell("hierarchy", hierarchy_from_string,
              [&](Hierarchy h) { conn.hierarchy = h; });
    const std::string size = cell(connections, row, "size");
    if (!size.empty()) {
      conn.size = static_cast<std::uint64_t>(
          parse_int(size, where + " column 'size'"));
    }
    conn.references = cell_references(cell(connections, row, "references"));
    if (!result.bif.connections.emplace(conn.id, conn).second) {
      throw ParseError(where, "duplicate connection id '" + conn.id + "'");
    }
  }

  return result;
}

// --- DOT export ----------------------------------------------------------

namespace {

std::string dot_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string export_dot_bif(const Bif& bif, const BraMapping* mapping) {
  std::ostringstream os;
  os << "digraph bif {\n  rankdir=LR;\n";

  std::map<std::string, std::string> component_of;  // circuit -> component
  if (mapping) {
    for (const auto& [component, circuit] : mapping->component_map) {
      component_of.emplace(circuit, component);
    }
  }

  int cluster = 0;
  for (const auto& [id, node] : bif.circuits) {
    std::string label = dot_escape(node.label.empty() ? id : node.label);
    if (node.is_uniform) {
      label += "\\n" + std::string(to_string(node.sign)) + " / " +
               std::string(to_string(node.transmitter));
    }
    const std::string decl = "\"" + dot_escape(id) + "\" [label=\"" + label +
                             "\", shape=" +
                             (node.is_uniform ? "ellipse" : "folder") + "];\n";
    auto paired = component_of.find(id);
    if (paired != component_of.end()) {
      os << "  subgraph \"cluster_" << cluster++ << "\" {\n";
      os << "    label=\"" << dot_escape(paired->second) << "\";\n";
      os << "    " << decl;
      os << "    \"component:" << dot_escape(paired->second)
         << "\" [shape=box, label=\"" << dot_escape(paired->second) << "\"];\n";
      os << "  }\n";
    } else {
      os << "  " << decl;
    }
  }
  for (const auto& [id, conn] : bif.connections) {
    os << "  \"" << dot_escape(conn.input) << "\" -> \""
       << dot_escape(conn.output) << "\" [label=\"" << dot_escape(id)
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string export_dot_hcd(const Hcd& hcd, const BraMapping* mapping) {
  std::ostringstream os;
  os << "digraph hcd {\n  rankdir=LR;\n";

  int cluster = 0;
  for (const auto& [id, comp] : hcd.components) {
    std::string label = dot_escape(comp.function_label.empty()
                                       ? id
                                       : comp.function_label);
    const std::string decl =
        "\"" + dot_escape(id) + "\" [shape=box, label=\"" + label + "\"];\n";
    const std::string circuit =
        mapping && mapping->component_map.contains(id)
            ? mapping->component_map.at(id)
            : "";
    if (!circuit.empty()) {
      os << "  subgraph \"cluster_" << cluster++ << "\" {\n";
      os << "    label=\"" << dot_escape(circuit) << "\";\n";
      os << "    " << decl;
      os << "    \"circuit:" << dot_escape(circuit)
         << "\" [shape=ellipse, label=\"" << dot_escape(circuit) << "\"];\n";
      os << "  }\n";
    } else {
      os << "  " << decl;
    }
  }
  for (const auto& [id, link] : hcd.links) {
    os << "  \"" << dot_escape(link.from.component) << "\" -> \""
       << dot_escape(link.to.component) << "\" [label=\""
       << dot_escape(link.signal_semantics) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

// --- reports -------------------------------------------------------------

json report_to_json(const ValidationReport& report) {
  json findings = json::array();
  for (const auto& f : report.findings) {
    findings.push_back({{"element", f.element},
                        {"rule", f.rule},
                        {"severity", std::string(to_string(f.severity))},
                        {"message", f.message}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "report"},
          {"errors", report.error_count()},
          {"warnings", report.warning_count()},
          {"findings", findings}};
}

json adequacy_to_json(const AdequacyReport& report) {
  json j = report_to_json(report.findings);
  j["kind"] = "adequacy";
  j["certifiable"] = report.certifiable;
  if (report.functionality) {
    j["functionality"] = std::string(to_string(*report.functionality));
  }
  return j;
}

json structural_scores_to_json(const StructuralScores& scores) {
  return {{"format_version", kFormatVersion},
          {"kind", "fidelity-structural"},
          {"node_precision", scores.node_precision},
          {"node_recall", scores.node_recall},
          {"edge_precision", scores.edge_precision},
          {"edge_recall", scores.edge_recall},
          {"f1_node", scores.f1_node},
          {"f1_edge", scores.f1_edge},
          {"combined", scores.combined}};
}

json activity_to_json(const ActivityResult& result) {
  return {{"format_version", kFormatVersion},
          {"kind", "fidelity-activity"},
          {"mean", result.mean},
          {"per_pair", result.per_pair}};
}

json performance_to_json(const PerformanceResult& result) {
  json tasks = json::array();
  for (const auto& t : result.tasks) {
    tasks.push_back(
        {{"name", t.name}, {"passed", t.passed}, {"cause", t.cause}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "fidelity-performance"},
          {"rate", result.rate},
          {"tasks", tasks}};
}

json merge_plan_to_json(const MergePlan& plan) {
  json decisions = json::array();
  for (const auto& d : plan.decisions) {
    decisions.push_back({{"circuit", d.pair.circuit},
                         {"component_a", d.pair.component_a},
                         {"component_b", d.pair.component_b},
                         {"strategy", std::string(to_string(d.strategy))},
                         {"survivor", d.survivor},
                         {"tie", d.tie},
                         {"score_a", d.score_a},
                         {"score_b", d.score_b},
                         {"semantic_conflict", d.semantic_conflict}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "merge-plan"},
          {"decisions", decisions},
          {"renames", plan.renames},
          {"merged_hcd", json::parse(serialize_hcd(plan.merged))}};
}

json feasibility_to_json(const FeasibilityVerdict& verdict) {
  return {{"format_version", kFormatVersion},
          {"kind", "feasibility"},
          {"feasible", verdict.feasible},
          {"unbindable", verdict.unbindable}};
}

}  // namespace bra
