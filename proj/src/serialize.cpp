#include "tropprod/serialize.hpp"

#include <sstream>

#include "tropprod/error.hpp"

namespace tropprod {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::InvalidInput, std::string("missing field ") + key);
  return j.at(key);
}

long as_long(const Json& j) {
  if (!j.is_number_integer()) throw Error(ErrorKind::InvalidInput, "expected an integer, got " + j.dump());
  return j.get<long>();
}

std::size_t as_size(const Json& j) {
  long v = as_long(j);
  if (v < 0) throw Error(ErrorKind::InvalidInput, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

Json to_json(const Int& x) {
  if (x.fits_slong_p()) return x.get_si();
  return x.get_str();
}

Int int_from_json(const Json& j) {
  if (j.is_number_integer()) return Int(j.get<long>());
  if (j.is_string()) {
    Int x;
    if (x.set_str(j.get<std::string>(), 10) != 0) throw Error(ErrorKind::InvalidInput, "bad integer " + j.dump());
    return x;
  }
  throw Error(ErrorKind::InvalidInput, "expected an integer, got " + j.dump());
}

Json to_json(const IntVector& v) {
  Json out = Json::array();
  for (const auto& x : v.coords()) out.push_back(to_json(x));
  return out;
}

IntVector vector_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidInput, "expected an integer vector");
  std::vector<Int> coords;
  for (const auto& x : j) coords.push_back(int_from_json(x));
  return IntVector(std::move(coords));
}

Json to_json(const LinearMap& f) {
  Json rows = Json::array();
  for (const auto& r : f.rows()) rows.push_back(to_json(r));
  Json out = {{"matrix", rows}};
  if (f.target_rank() == 0) out["source_rank"] = f.source_rank();
  return out;
}

LinearMap map_from_json(const Json& j) {
  const Json& m = field(j, "matrix");
  if (!m.is_array()) throw Error(ErrorKind::InvalidInput, "matrix must be an array of rows");
  if (m.empty()) return LinearMap(j.contains("source_rank") ? as_size(j.at("source_rank")) : 0, 0);
  std::vector<IntVector> rows;
  for (const auto& r : m) rows.push_back(vector_from_json(r));
  for (const auto& r : rows)
    if (r.rank() != rows[0].rank()) throw Error(ErrorKind::RankMismatch, "ragged matrix");
  return LinearMap::from_rows(rows[0].rank(), rows);
}

Json to_json(const RationalCone& c) {
  Json rays = Json::array();
  for (const auto& r : c.rays()) rays.push_back(to_json(r));
  return {{"rank", c.ambient_rank()}, {"rays", rays}};
}

RationalCone cone_from_json(const Json& j) {
  std::size_t rank = as_size(field(j, "rank"));
  std::vector<IntVector> rays;
  for (const auto& r : field(j, "rays")) {
    rays.push_back(vector_from_json(r));
    if (rays.back().rank() != rank) throw Error(ErrorKind::RankMismatch, "ray of wrong rank");
  }
  return RationalCone::from_generators(rank, rays);
}

Json to_json(const AbstractConeComplex& c) {
  Json cones = Json::object(), auts = Json::object(), faces = Json::array();
  for (const auto& [id, cone] : c.cones()) cones[id] = to_json(cone);
  for (const auto& f : c.faces()) faces.push_back(Json::array({f.sub, f.super, to_json(f.map)}));
  for (const auto& [id, cone] : c.cones()) {
    Json list = Json::array();
    for (const auto& a : c.auts(id)) list.push_back(to_json(a));
    auts[id] = list;
  }
  return {{"cones", cones}, {"faces", faces}, {"auts", auts}};
}

AbstractConeComplex complex_from_json(const Json& j) {
  AbstractConeComplex c;
  const Json& auts = j.contains("auts") ? j.at("auts") : Json::object();
  for (const auto& [id, cone] : field(j, "cones").items()) {
    std::vector<LinearMap> group;
    if (auts.contains(id))
      for (const auto& a : auts.at(id)) group.push_back(map_from_json(a));
    c.add_cone(id, cone_from_json(cone), group);
  }
  for (const auto& f : field(j, "faces")) {
    if (!f.is_array() || f.size() != 3) throw Error(ErrorKind::InvalidInput, "face must be [sub, super, map]");
    std::string sub = f[0].get<std::string>(), super = f[1].get<std::string>();
    if (!c.has_cone(sub) || !c.has_cone(super)) throw Error(ErrorKind::InvalidInput, "face refers to unknown cone");
    c.add_face(sub, super, map_from_json(f[2]));
  }
  return c;
}

Json to_json(const ComplexMorphism& f) {
  Json out = Json::object();
  for (const auto& [id, img] : f.images) out[id] = {{"target", img.target}, {"map", to_json(img.map)}};
  return out;
}

std::map<ConeId, ConeImage> images_from_json(const Json& j) {
  std::map<ConeId, ConeImage> out;
  for (const auto& [id, img] : j.items())
    out[id] = {field(img, "target").get<std::string>(), map_from_json(field(img, "map"))};
  return out;
}

Json to_json(const SubdivisionOf& s) {
  return {{"original", to_json(*s.original)}, {"refined", to_json(*s.refined)}, {"projection", to_json(s.proj)}};
}

SubdivisionOf subdivision_from_json(const Json& j, std::shared_ptr<const AbstractConeComplex> original) {
  if (j.contains("original") && j.at("original") != to_json(*original))
    throw Error(ErrorKind::InvalidInput, "subdivision is of a different complex");
  std::map<ConeId, std::vector<RationalCone>> cells;
  auto refined = std::make_shared<AbstractConeComplex>(complex_from_json(field(j, "refined")));
  auto images = images_from_json(field(j, "projection"));
  for (const auto& [id, cone] : refined->cones()) {
    if (!images.count(id)) throw Error(ErrorKind::InvalidInput, "refined cone " + id + " has no projection");
    const auto& img = images.at(id);
    if (!original->has_cone(img.target)) throw Error(ErrorKind::InvalidInput, "unknown host " + img.target);
    if (!img.map.is_identity()) throw Error(ErrorKind::InvalidInput, "projection of " + id + " is not the identity");
    if (cone.dim() != original->cone(img.target).dim()) continue;
    // Refined cones are orbit representatives; the host needs every cell.
    for (const auto& a : original->auts(img.target)) cells[img.target].push_back(transform(a, cone));
  }
  // Rebuilding validates tiling, invariance and gluing and yields the same ids.
  SubdivisionOf s = assemble_subdivision(original, cells);
  if (to_json(*s.refined) != to_json(*refined)) throw Error(ErrorKind::InvalidInput, "refined complex is inconsistent");
  return s;
}

Json to_json(const ConicalSubset& s) {
  Json out = Json::array();
  for (const auto& p : s.pieces) out.push_back({{"host", p.host}, {"cone", to_json(p.cone)}});
  return out;
}

ConicalSubset subset_from_json(const Json& j) {
  ConicalSubset s;
  for (const auto& p : j) s.pieces.push_back({field(p, "host").get<std::string>(), cone_from_json(field(p, "cone"))});
  return s;
}

Json to_json(const DualGraph& g) {
  Json vertices = Json::array(), edges = Json::array(), legs = Json::object();
  for (int x : g.genus) vertices.push_back({{"genus", x}});
  for (const auto& [a, b] : g.edges) edges.push_back(Json::array({a, b}));
  for (int i = 0; i < g.num_legs(); ++i) legs[std::to_string(i + 1)] = g.legs[i];
  return {{"vertices", vertices}, {"edges", edges}, {"legs", legs}};
}

DualGraph graph_from_json(const Json& j) {
  DualGraph g;
  for (const auto& v : field(j, "vertices")) g.genus.push_back(static_cast<int>(as_long(field(v, "genus"))));
  int nv = g.num_vertices();
  auto vertex = [&](const Json& x) {
    long v = as_long(x);
    if (v < 0 || v >= nv) throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(v) + " out of range");
    return static_cast<int>(v);
  };
  for (const auto& e : field(j, "edges")) {
    if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::InvalidInput, "edge must be [u, v]");
    int a = vertex(e[0]), b = vertex(e[1]);
    g.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  const Json& legs = field(j, "legs");
  g.legs.assign(legs.size(), -1);
  for (const auto& [k, v] : legs.items()) {
    std::size_t i = std::stoul(k);
    if (i < 1 || i > legs.size()) throw Error(ErrorKind::InvalidInput, "legs must be labeled 1..n");
    g.legs[i - 1] = vertex(v);
  }
  return g;
}

Json to_json(const RubberMapType& t) {
  Json out = to_json(t.graph);
  Json slopes = Json::object(), legs = Json::object();
  for (std::size_t i = 0; i < t.num_factors(); ++i) {
    Json per = Json::object();
    for (int e = 0; e < t.graph.num_edges(); ++e)
      per[std::to_string(e)] = Json::array({t.graph.edges[e].first, t.graph.edges[e].second, t.slopes[i][e]});
    slopes[std::to_string(i + 1)] = per;
    legs[std::to_string(i + 1)] = t.leg_slopes[i];
  }
  out["slopes"] = slopes;
  out["leg_slopes"] = legs;
  return out;
}

RubberMapType type_from_json(const Json& j) {
  RubberMapType t;
  t.graph = graph_from_json(j);
  const Json& slopes = field(j, "slopes");
  const Json& legs = field(j, "leg_slopes");
  if (slopes.size() != legs.size()) throw Error(ErrorKind::InvalidInput, "slopes and leg_slopes disagree");
  for (std::size_t i = 1; i <= slopes.size(); ++i) {
    std::string k = std::to_string(i);
    if (!slopes.contains(k) || !legs.contains(k)) throw Error(ErrorKind::InvalidInput, "factors must be labeled 1..r");
    std::vector<long> s(t.graph.num_edges(), 0);
    std::vector<bool> seen(s.size(), false);
    for (const auto& [e, v] : slopes.at(k).items()) {
      std::size_t idx = std::stoul(e);
      if (idx >= s.size() || !v.is_array() || v.size() != 3)
        throw Error(ErrorKind::InvalidInput, "slope entry must be edge-id: [tail, head, slope]");
      auto [a, b] = t.graph.edges[idx];
      long tail = as_long(v[0]), head = as_long(v[1]), slope = as_long(v[2]);
      if (tail == a && head == b) s[idx] = slope;
      else if (tail == b && head == a) s[idx] = -slope;
      else throw Error(ErrorKind::NoSuchEdge, "edge " + e + " does not join " + std::to_string(tail) + " and " +
                                                  std::to_string(head));
      seen[idx] = true;
    }
    for (bool b : seen)
      if (!b) throw Error(ErrorKind::InvalidInput, "every edge needs a slope in factor " + k);
    std::vector<long> l;
    for (const auto& x : legs.at(k)) l.push_back(as_long(x));
    if (static_cast<int>(l.size()) != t.graph.num_legs())
      throw Error(ErrorKind::InvalidInput, "leg_slopes length differs from the number of legs");
    t.slopes.push_back(std::move(s));
    t.leg_slopes.push_back(std::move(l));
  }
  return t;
}

Json to_json(const ContactData& c) {
  Json factors = Json::array();
  for (const auto& a : c.factors) factors.push_back(a);
  return {{"g", c.g}, {"n", c.n}, {"factors", factors}};
}

Json to_json(const SubdivisionSummary& s) {
  Json rays = Json::array();
  for (const auto& [host, r] : s.new_rays) rays.push_back({{"host", host}, {"ray", to_json(r)}});
  return {{"method", s.method},
          {"cones_before", s.cones_before},
          {"cones_after", s.cones_after},
          {"maximal_before", s.maximal_before},
          {"maximal_after", s.maximal_after},
          {"new_rays", rays}};
}

Json to_json(const CheckResult& c) {
  Json out = {{"name", c.name}, {"ok", c.ok}, {"checked", c.checked}, {"failures", c.failures}};
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

Json to_json(const Report& r) {
  Json inputs = Json::object(), checks = Json::array();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  Json out = {{"title", r.title}, {"ok", r.ok()}, {"inputs", inputs}};
  if (r.subdivision) out["subdivision"] = to_json(*r.subdivision);
  out["checks"] = checks;
  out["notes"] = r.notes;
  if (r.seconds) out["seconds"] = *r.seconds;
  return out;
}

Report report_from_json(const Json& j) {
  Report r;
  r.title = field(j, "title").get<std::string>();
  for (const auto& [k, v] : field(j, "inputs").items()) r.inputs.push_back({k, v.get<std::string>()});
  if (j.contains("subdivision")) {
    const Json& s = j.at("subdivision");
    SubdivisionSummary sum;
    sum.method = field(s, "method").get<std::string>();
    sum.cones_before = as_size(field(s, "cones_before"));
    sum.cones_after = as_size(field(s, "cones_after"));
    sum.maximal_before = as_size(field(s, "maximal_before"));
    sum.maximal_after = as_size(field(s, "maximal_after"));
    for (const auto& x : field(s, "new_rays"))
      sum.new_rays.push_back({field(x, "host").get<std::string>(), vector_from_json(field(x, "ray"))});
    r.subdivision = sum;
  }
  for (const auto& c : field(j, "checks")) {
    CheckResult cr;
    cr.name = field(c, "name").get<std::string>();
    cr.ok = field(c, "ok").get<bool>();
    cr.checked = as_size(field(c, "checked"));
    cr.failures = as_size(field(c, "failures"));
    if (c.contains("detail")) cr.detail = c.at("detail").get<std::string>();
    r.checks.push_back(cr);
  }
  r.notes = field(j, "notes").get<std::vector<std::string>>();
  if (j.contains("seconds")) r.seconds = j.at("seconds").get<double>();
  return r;
}

std::string to_text(const Report& r) {
  std::ostringstream os;
  os << r.title << "\n";
  for (const auto& [k, v] : r.inputs) os << "  " << k << " = " << v << "\n";
  if (r.subdivision) {
    const auto& s = *r.subdivision;
    os << "subdivision: " << s.method << "\n"
       << "  cones " << s.cones_before << " -> " << s.cones_after << ", maximal " << s.maximal_before << " -> "
       << s.maximal_after << ", new ray orbits " << s.new_rays.size() << "\n";
    for (const auto& [host, ray] : s.new_rays) os << "  ray " << ray.to_string() << " in " << host << "\n";
  }
  os << "checks:\n";
  for (const auto& c : r.checks) {
    os << "  " << (c.ok ? "[ok]   " : "[FAIL] ") << c.name << " (" << c.checked << " checked";
    if (c.failures) os << ", " << c.failures << " failed";
    os << ")\n";
    if (!c.detail.empty()) os << "         " << c.detail << "\n";
  }
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  if (r.seconds) os << "time: " << *r.seconds << " s\n";
  os << "result: " << (r.ok() ? "ok" : "FAILED") << "\n";
  return os.str();
}

namespace {

std::string dot_body(const DualGraph& g, const std::vector<std::string>& edge_labels,
                     const std::vector<std::string>& leg_labels) {
  std::ostringstream os;
  os << "  node [shape=circle];\n";
  for (int v = 0; v < g.num_vertices(); ++v) os << "  v" << v << " [label=\"" << g.genus[v] << "\"];\n";
  for (int e = 0; e < g.num_edges(); ++e)
    os << "  v" << g.edges[e].first << " -- v" << g.edges[e].second << " [label=\"" << edge_labels[e] << "\"];\n";
  for (int i = 0; i < g.num_legs(); ++i) {
    os << "  leg" << i + 1 << " [shape=none, label=\"\", width=0, height=0];\n";
    os << "  v" << g.legs[i] << " -- leg" << i + 1 << " [label=\"" << leg_labels[i] << "\"];\n";
  }
  return os.str();
}

}  // namespace

std::string to_dot(const DualGraph& g, const std::string& name) {
  std::vector<std::string> edges, legs;
  for (int e = 0; e < g.num_edges(); ++e) edges.push_back("l" + std::to_string(e + 1));
  for (int i = 0; i < g.num_legs(); ++i) legs.push_back(std::to_string(i + 1));
  return "graph " + name + " {\n" + dot_body(g, edges, legs) + "}\n";
}

std::string to_dot(const RubberMapType& t, const std::string& name) {
  auto slopes = [&](const std::vector<std::vector<long>>& s, int i) {
    std::string out;
    for (std::size_t f = 0; f < s.size(); ++f) out += (f ? "," : "") + std::to_string(s[f][i]);
    return s.size() > 1 ? "(" + out + ")" : out;
  };
  std::vector<std::string> edges, legs;
  for (int e = 0; e < t.graph.num_edges(); ++e)
    edges.push_back("l" + std::to_string(e + 1) + ": " + slopes(t.slopes, e));
  for (int i = 0; i < t.graph.num_legs(); ++i) legs.push_back(std::to_string(i + 1) + ": " + slopes(t.leg_slopes, i));
  return "graph " + name + " {\n  // edge slopes read from the lower vertex to the higher one\n" +
         dot_body(t.graph, edges, legs) + "}\n";
}

}  // namespace tropprod
