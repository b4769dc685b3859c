#include "tropprod/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tropprod/error.hpp"
#include "tropprod/pipeline.hpp"
#include "tropprod/serialize.hpp"

namespace tropprod {

std::vector<long> parse_slopes(const std::string& s) {
  std::vector<long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != item.size()) throw Error(ErrorKind::InvalidInput, "bad slope '" + item + "' in '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "empty slope vector");
  return out;
}

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

void need_gn(const RunConfig& c) {
  if (c.g < 0 || c.n < 0) throw Error(ErrorKind::InvalidInput, c.verb + " needs g and n");
}

ContactData contact(const RunConfig& c, std::size_t min_factors) {
  need_gn(c);
  ContactData out{c.g, c.n, c.factors};
  if (out.factors.size() < min_factors)
    throw Error(ErrorKind::InvalidInput, c.verb + " needs " + std::to_string(min_factors) + " slope vector(s)");
  out.validate();
  return out;
}

bool within(const RunConfig& c, const DualGraph& g) { return c.max_edges < 0 || g.num_edges() <= c.max_edges; }

struct Output {
  Json json;
  std::string text;
  std::string dot;
  bool ok = true;
};

void emit(const RunConfig& c, const Output& o, std::ostream& out) {
  if (c.format == "json") out << o.json.dump(2) << "\n";
  else if (c.format == "text") out << o.text;
  else if (o.dot.empty()) throw Error(ErrorKind::InvalidInput, c.verb + " has no DOT rendering");
  else out << o.dot;
}

Output from_report(const Report& r) { return {to_json(r), to_text(r), {}, r.ok()}; }

Output enumerate_graphs(const RunConfig& c) {
  need_gn(c);
  Output o;
  Json list = Json::array();
  std::ostringstream text, dot;
  int i = 0;
  for (const auto& g : enumerate_stable_graphs(c.g, c.n)) {
    if (!within(c, g)) continue;
    std::string key = canonical_form(g).key;
    Json j = {{"id", key}};
    j.update(to_json(g));
    list.push_back(j);
    text << key << "\n";
    dot << to_dot(g, "G" + std::to_string(i++));
  }
  o.json = {{"g", c.g}, {"n", c.n}, {"count", list.size()}, {"graphs", list}};
  o.text = std::to_string(list.size()) + " stable graphs of genus " + std::to_string(c.g) + " with " +
           std::to_string(c.n) + " markings\n" + text.str();
  o.dot = dot.str();
  return o;
}

Output moduli_complex(const RunConfig& c) {
  need_gn(c);
  CurveModuliComplex m = build_moduli_complex(c.g, c.n);
  auto violations = validate_complex(*m.complex);
  Output o;
  Json graphs = Json::object(), bad = Json::array();
  for (const auto& [id, g] : m.graphs) graphs[id] = to_json(g);
  for (const auto& v : violations) bad.push_back({{"cone", v.cone}, {"message", v.message}});
  o.json = {{"g", c.g}, {"n", c.n}, {"complex", to_json(*m.complex)}, {"graphs", graphs}, {"violations", bad}};
  std::ostringstream text, dot;
  text << m.complex->size() << " cones, " << m.complex->faces().size() << " face maps, "
       << m.complex->maximal_cones().size() << " maximal, " << violations.size() << " violations\n";
  int i = 0;
  for (const auto& [id, cone] : m.complex->cones()) {
    text << "  " << id << "  dim " << cone.dim() << "  |Aut| " << m.complex->auts(id).size() << "\n";
    dot << to_dot(m.graphs.at(id), "G" + std::to_string(i++));
  }
  for (const auto& v : violations) text << "violation " << v.cone << ": " << v.message << "\n";
  o.text = text.str();
  o.dot = dot.str();
  o.ok = violations.empty();
  return o;
}

std::vector<RubberMapType> types_for(const ContactData& c) {
  return c.factors.size() == 1 ? enumerate_rubber_types(c, 0) : enumerate_joint_types(c);
}

Output enumerate_maps(const RunConfig& c) {
  ContactData data = contact(c, 1);
  Output o;
  Json list = Json::array();
  std::ostringstream text, dot;
  int i = 0;
  for (const auto& t : types_for(data)) {
    if (!within(c, t.graph)) continue;
    CanonicalType ct = canonical_type(t);
    ModuliCone mc = moduli_cone(t);
    Json j = {{"id", ct.key}};
    j.update(to_json(t));
    j["moduli_cone"] = to_json(mc.cone);
    j["contracted_cycle"] = t.has_contracted_cycle();
    list.push_back(j);
    text << ct.key << "  dim " << mc.cone.dim() << (t.has_contracted_cycle() ? "  contracted cycle" : "") << "\n";
    dot << to_dot(t, "T" + std::to_string(i++));
  }
  o.json = {{"contact", to_json(data)}, {"count", list.size()}, {"types", list}};
  o.text = std::to_string(list.size()) + " types\n" + text.str();
  o.dot = dot.str();
  return o;
}

Output image(const RunConfig& c) {
  std::vector<RubberMapType> types;
  int g = c.g, n = c.n;
  if (!c.input.empty()) {
    RubberMapType t = type_from_json(read_json(c.input));
    if (!t.is_balanced()) throw Error(ErrorKind::InvalidInput, "type is not balanced");
    g = genus(t.graph);
    n = t.graph.num_legs();
    types.push_back(t);
  } else {
    types = types_for(contact(c, 1));
  }
  CurveModuliComplex base = build_moduli_complex(g, n);
  Output o;
  Json list = Json::array();
  std::ostringstream text, dot;
  int i = 0;
  for (const auto& t : types) {
    if (!within(c, t.graph)) continue;
    StableImage img = forgetful_image(t);
    if (!base.complex->has_cone(img.host)) throw Error(ErrorKind::Unstable, "no host cone for " + t.to_string());
    bool conical = is_union_of_cones(*base.complex, ConicalSubset{{{img.host, img.image}}}).ok;
    list.push_back({{"type", canonical_type(t).key},
                    {"host", img.host},
                    {"map", to_json(img.map)},
                    {"image", to_json(img.image)},
                    {"union_of_cones", conical}});
    text << canonical_type(t).key << " -> " << img.host << "  " << img.image.to_string()
         << (conical ? "" : "  not a union of cones") << "\n";
    dot << to_dot(t, "T" + std::to_string(i++));
  }
  o.json = {{"g", g}, {"n", n}, {"images", list}};
  o.text = text.str();
  o.dot = dot.str();
  return o;
}

std::vector<FactorRun> factor_runs(const ContactData& data, const CurveModuliComplex& base) {
  std::vector<FactorRun> runs;
  const char* names[] = {"X", "Y"};
  for (std::size_t i = 0; i < data.factors.size(); ++i) {
    std::string name = i < 2 ? names[i] : "X" + std::to_string(i + 1);
    runs.push_back(build_factor(name, enumerate_rubber_types(data, i), base, data.single(i)));
  }
  if (data.factors.size() == 2) runs.push_back(build_factor("Z", enumerate_joint_types(data), base, data));
  return runs;
}

Output subdivide(const RunConfig& c) {
  ContactData data = contact(c, 1);
  CurveModuliComplex base = build_moduli_complex(data.g, data.n);
  std::vector<FactorRun> runs = factor_runs(data, base);
  std::vector<ConicalSubset> families;
  for (const auto& r : runs) families.push_back(r.images);
  SubdivisionOf s = build_gamma_subdivision(base, families, c.unimodularize);
  Output o;
  SubdivisionSummary sum = summarize(s, c.unimodularize ? "covector arrangement, unimodular" : "covector arrangement");
  Json checks = Json::array();
  std::ostringstream text;
  for (const auto& r : runs) {
    bool ok = is_union_of_cones(s, r.images).ok;
    o.ok = o.ok && ok;
    checks.push_back({{"factor", r.name}, {"union_of_cones", ok}});
    text << "union_of_cones[" << r.name << "] " << (ok ? "ok" : "FAILED") << "\n";
  }
  o.json = {{"contact", to_json(data)}, {"summary", to_json(sum)}, {"checks", checks}, {"subdivision", to_json(s)}};
  Report r;
  r.title = "subdivision";
  r.subdivision = sum;
  std::string summary = to_text(r);
  o.text = summary.substr(0, summary.find("checks:")) + text.str();
  return o;
}

Output verify(const RunConfig& c) {
  ContactData data = contact(c, 1);
  if (data.factors.size() > 2) throw Error(ErrorKind::InvalidInput, "verify takes one or two slope vectors");
  CurveModuliComplex base = build_moduli_complex(data.g, data.n);
  std::vector<FactorRun> runs = factor_runs(data, base);
  SubdivisionOf s = c.subdivision.empty() ? identity_subdivision(base.complex)
                                          : subdivision_from_json(read_json(c.subdivision), base.complex);
  Report report;
  report.title = "verify";
  report.inputs = {{"g", std::to_string(data.g)}, {"n", std::to_string(data.n)}};
  for (std::size_t i = 0; i < data.factors.size(); ++i) {
    std::string a;
    for (std::size_t k = 0; k < data.factors[i].size(); ++k) a += (k ? "," : "") + std::to_string(data.factors[i][k]);
    report.inputs.push_back({"A" + std::to_string(i + 1), a});
  }
  report.inputs.push_back({"subdivision", c.subdivision.empty() ? "none" : c.subdivision});
  report.subdivision = summarize(s, c.subdivision.empty() ? "none" : "from file");
  std::vector<const FactorRun*> ptrs;
  for (const auto& r : runs) ptrs.push_back(&r);
  verify_theorem_hypotheses(ptrs, base, s, report);
  report.notes.push_back(kScopeStatement);
  return from_report(report);
}

Output product(const RunConfig& c) {
  ContactData data = contact(c, 1);
  if (data.factors.size() > 2) throw Error(ErrorKind::InvalidInput, "product-check takes one or two slope vectors");
  return from_report(product_check(data, c.unimodularize));
}

Output dr(const RunConfig& c) {
  ContactData data = contact(c, 1);
  if (data.factors.size() != 1) throw Error(ErrorKind::InvalidInput, "dr-support takes one slope vector");
  DrSupport d = dr_support(data, 0, c.unimodularize);
  Output o = from_report(d.report);
  Json cones = Json::array();
  std::ostringstream text;
  for (const auto& sc : d.cones) {
    cones.push_back({{"host", sc.host},
                     {"type", sc.type},
                     {"cone", to_json(sc.cone)},
                     {"host_dim", sc.host_dim},
                     {"codim", sc.codim}});
    text << "  " << sc.host << "  codim " << sc.codim << "  " << sc.cone.to_string() << "\n";
  }
  o.json = {{"report", o.json}, {"support", cones}};
  o.text += "support cones:\n" + text.str();
  return o;
}

Output figure1(const RunConfig&) {
  Output o = from_report(figure1_demo());
  o.dot = to_dot(figure1_type(), "Figure1");
  return o;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.format != "json" && config.format != "text" && config.format != "dot")
      throw Error(ErrorKind::InvalidInput, "unknown format " + config.format);
    auto start = std::chrono::steady_clock::now();
    Output o;
    const std::string& v = config.verb;
    if (v == "enumerate-graphs") o = enumerate_graphs(config);
    else if (v == "moduli-complex") o = moduli_complex(config);
    else if (v == "enumerate-maps") o = enumerate_maps(config);
    else if (v == "image") o = image(config);
    else if (v == "subdivide") o = subdivide(config);
    else if (v == "verify") o = verify(config);
    else if (v == "product-check") o = product(config);
    else if (v == "dr-support") o = dr(config);
    else if (v == "figure1") o = figure1(config);
    else throw Error(ErrorKind::InvalidInput, "unknown verb '" + v + "'");
    if (config.timing) {
      double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      o.json["seconds"] = secs;
      o.text += "time: " + std::to_string(secs) + " s\n";
    }
    emit(config, o, out);
    return o.ok ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tropical moduli of curves and maps: enumeration, subdivision and product checks", "tropprod"};
  app.require_subcommand(1);
  RunConfig config;
  std::vector<std::string> positional, flagged;
  auto common = [&](CLI::App* sub, bool gn, bool slopes) {
    sub->add_option("--format", config.format, "json, text or dot")->check(CLI::IsMember({"json", "text", "dot"}));
    sub->add_option("--seed", config.seed, "seed for sampled checks");
    sub->add_flag("--timing", config.timing, "append wall-clock time");
    sub->add_option("--max-edges", config.max_edges, "skip graphs with more edges");
    sub->add_flag("--unimodularize", config.unimodularize, "refine until every cell is unimodular");
    if (gn) {
      sub->add_option("g", config.g, "genus");
      sub->add_option("n", config.n, "number of markings");
    }
    if (slopes) {
      sub->add_option("slopes", positional, "slope vectors such as 2,-2");
      sub->add_option("-A,--factor", flagged, "slope vector (repeatable)");
    }
  };
  common(app.add_subcommand("enumerate-graphs", "stable graphs of genus g with n markings"), true, false);
  common(app.add_subcommand("moduli-complex", "the cone complex of tropical curves"), true, false);
  common(app.add_subcommand("enumerate-maps", "combinatorial types of maps with the given slopes"), true, true);
  auto* img = app.add_subcommand("image", "forgetful images of map types");
  common(img, true, true);
  img->add_option("--input", config.input, "map type JSON");
  common(app.add_subcommand("subdivide", "subdivision making all images unions of cones"), true, true);
  auto* ver = app.add_subcommand("verify", "check the hypotheses against a given subdivision");
  common(ver, true, true);
  ver->add_option("--subdivision", config.subdivision, "subdivision JSON (default: no subdivision)");
  common(app.add_subcommand("product-check", "full check for two factors"), true, true);
  common(app.add_subcommand("dr-support", "support of the double ramification locus"), true, true);
  common(app.add_subcommand("figure1", "the theta graph example with contact (3,-3)"), false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  config.verb = app.get_subcommands().front()->get_name();
  try {
    for (const auto& s : positional) config.factors.push_back(parse_slopes(s));
    for (const auto& s : flagged) config.factors.push_back(parse_slopes(s));
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return run(config, out, err);
}

}  // namespace tropprod
