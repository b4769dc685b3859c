#include "tropprod/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tropprod/error.hpp"

namespace tropprod {

const char* const kScopeStatement =
    "Only the polyhedral hypotheses are checked: cone-onto-cone, lattice surjectivity, "
    "images as unions of cones and the fiber product tiling. Chow-level identities are not computed.";

bool Report::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok; });
}

CheckResult& Report::add(CheckResult c) {
  checks.push_back(std::move(c));
  return checks.back();
}

ConicalSubset image_family(const MapModuliComplex& m) {
  ConicalSubset out;
  std::set<std::pair<ConeId, std::vector<IntVector>>> seen;
  for (const auto& id : m.complex->maximal_cones()) {
    const auto& img = m.forgetful.images.at(id);
    RationalCone c = m.complex->cone(id).image(img.map);
    if (seen.emplace(img.target, c.rays()).second) out.pieces.push_back({img.target, c});
  }
  return out;
}

FactorRun build_factor(std::string name, const std::vector<RubberMapType>& types, const CurveModuliComplex& base,
                       const ContactData& contact) {
  FactorRun r;
  r.name = std::move(name);
  r.contact = contact;
  r.types = types;
  r.complex = build_map_complex(types, base);
  r.images = image_family(r.complex);
  for (const auto& [id, t] : r.complex.types)
    if (t.has_contracted_cycle()) ++r.contracted_cycle_types;
  return r;
}

SubdivisionOf build_gamma_subdivision(const CurveModuliComplex& base, const std::vector<ConicalSubset>& images,
                                      bool unimodularize) {
  ConicalSubset all;
  for (const auto& s : images) all.pieces.insert(all.pieces.end(), s.pieces.begin(), s.pieces.end());
  SubdivisionOf s = refine_until_conical(base.complex, all, unimodularize);
  for (const auto& family : images)
    if (!is_union_of_cones(s, family).ok) throw std::logic_error("image family is not a union of cones");
  return s;
}

std::vector<PullbackResult> pullback_map_complexes(const std::vector<const MapModuliComplex*>& complexes,
                                                   const SubdivisionOf& base) {
  std::vector<PullbackResult> out;
  for (const auto* m : complexes) out.push_back(pullback_subdivision(m->forgetful, base));
  return out;
}

SubdivisionSummary summarize(const SubdivisionOf& s, std::string method) {
  SubdivisionSummary out;
  out.method = std::move(method);
  out.cones_before = s.original->size();
  out.cones_after = s.refined->size();
  out.maximal_before = s.original->maximal_cones().size();
  out.maximal_after = s.refined->maximal_cones().size();
  for (const auto& [id, img] : s.proj.images) {
    const auto& c = s.refined->cone(id);
    if (c.dim() == 1 && s.original->cone(img.target).dim() > 1) out.new_rays.push_back({img.target, c.rays()[0]});
  }
  return out;
}

namespace {

std::string first_words(const std::string& s, std::size_t limit = 200) {
  return s.size() <= limit ? s : s.substr(0, limit) + "...";
}

CheckResult named(std::string name) {
  CheckResult c;
  c.name = std::move(name);
  return c;
}

void fail(CheckResult& c, const std::string& detail) {
  c.ok = false;
  if (c.failures++ == 0) c.detail = first_words(detail);
}

IntVector pad(const IntVector& v, std::size_t before, std::size_t after) {
  IntVector out(before + v.rank() + after);
  for (std::size_t i = 0; i < v.rank(); ++i) out[before + i] = v[i];
  return out;
}

// [f; g] : R^n -> R^{a+b}
LinearMap stack(const LinearMap& f, const LinearMap& g) {
  LinearMap out(f.source_rank(), f.target_rank() + g.target_rank());
  for (std::size_t r = 0; r < f.target_rank(); ++r)
    for (std::size_t c = 0; c < f.source_rank(); ++c) out.at(r, c) = f.at(r, c);
  for (std::size_t r = 0; r < g.target_rank(); ++r)
    for (std::size_t c = 0; c < g.source_rank(); ++c) out.at(f.target_rank() + r, c) = g.at(r, c);
  return out;
}

LinearMap block(const LinearMap& a, const LinearMap& b) {
  LinearMap out(a.source_rank() + b.source_rank(), a.target_rank() + b.target_rank());
  for (std::size_t r = 0; r < a.target_rank(); ++r)
    for (std::size_t c = 0; c < a.source_rank(); ++c) out.at(r, c) = a.at(r, c);
  for (std::size_t r = 0; r < b.target_rank(); ++r)
    for (std::size_t c = 0; c < b.source_rank(); ++c) out.at(a.target_rank() + r, a.source_rank() + c) = b.at(r, c);
  return out;
}

std::vector<int> invert(const std::vector<int>& p) {
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[p[i]] = static_cast<int>(i);
  return out;
}

// Y graph -> canonical graph -> alpha -> canonical graph -> X graph.
GraphIdentification identification(const CanonicalForm& cx, const CanonicalForm& cy, const GraphAutomorphism& alpha) {
  std::vector<int> xv = invert(cx.vertex_map), xe = invert(cx.edge_map);
  GraphIdentification id;
  for (int v : cy.vertex_map) id.vertices.push_back(xv[alpha.vertices[v]]);
  for (std::size_t e = 0; e < cy.edge_map.size(); ++e) {
    int c = alpha.edges[cy.edge_map[e]];
    int ex = xe[c];
    id.edges.push_back(ex);
    id.flips.push_back(cy.flips[e] ^ alpha.flips[cy.edge_map[e]] ^ cx.flips[ex]);
  }
  return id;
}

RationalCone restrict_to_cell(const RationalCone& c, const LinearMap& f, const RationalCone& cell) {
  std::vector<IntVector> ineq = c.facets(), eq = c.span_equations();
  for (const auto& u : cell.facets()) ineq.push_back(f.pullback(u));
  for (const auto& e : cell.span_equations()) eq.push_back(f.pullback(e));
  return RationalCone::from_inequalities(c.ambient_rank(), ineq, eq);
}

std::vector<IntVector> orbit_key(const RationalCone& c, const std::vector<LinearMap>& ax,
                                 const std::vector<LinearMap>& ay) {
  std::vector<IntVector> best;
  bool first = true;
  for (const auto& b : ax)
    for (const auto& d : ay) {
      auto k = transformed_rays(block(b, d), c);
      if (first || k < best) best = std::move(k);
      first = false;
    }
  return best;
}

std::map<ConeId, std::vector<ConeId>> types_over(const FactorRun& r) {
  std::map<ConeId, std::vector<ConeId>> out;
  for (const auto& [id, img] : r.complex.forgetful.images) out[img.target].push_back(id);
  return out;
}

}  // namespace

NuResult check_nu(const FactorRun& x, const FactorRun& y, const FactorRun& z, const CurveModuliComplex& base,
                  const SubdivisionOf& s) {
  NuResult out;
  out.check.name = "fiber_product_tiling";
  std::set<std::string> found;
  auto over_x = types_over(x), over_y = types_over(y);
  for (const auto& [sigma, graph] : base.graphs) {
    if (!over_x.count(sigma) || !over_y.count(sigma)) continue;
    CanonicalForm cs = canonical_form(graph);
    if (cs.graph != graph) throw std::logic_error("curve complex graph is not canonical");
    std::vector<RationalCone> cells = s.cells(sigma);
    for (const auto& xid : over_x.at(sigma)) {
      const RubberMapType& tx = x.complex.types.at(xid);
      const RationalCone& cx_cone = x.complex.complex->cone(xid);
      const LinearMap& fx = x.complex.forgetful.images.at(xid).map;
      CanonicalForm cx = canonical_form(tx.graph);
      std::size_t ex = cx_cone.ambient_rank();
      for (const auto& yid : over_y.at(sigma)) {
        const RubberMapType& ty = y.complex.types.at(yid);
        const RationalCone& cy_cone = y.complex.complex->cone(yid);
        const LinearMap& fy = y.complex.forgetful.images.at(yid).map;
        CanonicalForm cy = canonical_form(ty.graph);
        std::size_t ey = cy_cone.ambient_rank();
        if (!tx.graph.is_stable() || !ty.graph.is_stable()) {
          fail(out.check, "unstable source graph in " + xid + " or " + yid);
          continue;
        }
        std::set<std::vector<IntVector>> seen;
        for (const auto& alpha : cs.automorphisms) {
          std::vector<IntVector> ineq, eq;
          for (const auto& u : cx_cone.facets()) ineq.push_back(pad(u, 0, ey));
          for (const auto& u : cy_cone.facets()) ineq.push_back(pad(u, ex, 0));
          for (const auto& u : cx_cone.span_equations()) eq.push_back(pad(u, 0, ey));
          for (const auto& u : cy_cone.span_equations()) eq.push_back(pad(u, ex, 0));
          LinearMap ay = alpha.edge_action() * fy;
          for (std::size_t r = 0; r < fx.target_rank(); ++r) {
            IntVector row(ex + ey);
            for (std::size_t c = 0; c < ex; ++c) row[c] = fx.at(r, c);
            for (std::size_t c = 0; c < ey; ++c) row[ex + c] = -ay.at(r, c);
            eq.push_back(row);
          }
          RationalCone fp = RationalCone::from_inequalities(ex + ey, ineq, eq);
          if (!seen.insert(orbit_key(fp, x.complex.complex->auts(xid), y.complex.complex->auts(yid))).second)
            continue;
          if (fp.is_zero() && (cx_cone.dim() > 0 || cy_cone.dim() > 0)) continue;
          IntVector w = fp.interior_point();
          IntVector u(ex), v(ey);
          for (std::size_t i = 0; i < ex; ++i) u[i] = w[i];
          for (std::size_t i = 0; i < ey; ++i) v[i] = w[ex + i];
          if (!cx_cone.in_relative_interior(u) || !cy_cone.in_relative_interior(v)) continue;
          ++out.fiber_cones;

          std::vector<ProductType> products = superimpose(tx, ty, identification(cx, cy, alpha));
          std::vector<std::pair<RationalCone, LinearMap>> parts;
          for (const auto& p : products) {
            CanonicalType ct = canonical_type(p.type);
            if (!z.complex.types.count(ct.key)) {
              fail(out.check, "product type " + ct.key + " over " + sigma + " is missing from " + z.name);
              continue;
            }
            found.insert(ct.key);
            parts.push_back({p.cone, stack(p.to_x, p.to_y)});
          }
          LinearMap fx0(ex + ey, fx.target_rank());
          for (std::size_t r = 0; r < fx.target_rank(); ++r)
            for (std::size_t c = 0; c < ex; ++c) fx0.at(r, c) = fx.at(r, c);
          for (const auto& beta : cells) {
            RationalCone piece = restrict_to_cell(fp, fx0, beta);
            if (piece.dim() != fp.dim()) continue;
            ++out.check.checked;
            std::vector<RationalCone> images;
            for (const auto& [cone, d] : parts) {
              RationalCone zc = restrict_to_cell(cone, fx0 * d, beta);
              if (zc.dim() != piece.dim()) continue;
              images.push_back(zc.image(d));
            }
            if (piece.dim() == 0) {
              if (images.empty()) fail(out.check, "zero fiber product cone over " + sigma + " has no product type");
              continue;
            }
            TilingCheck t = check_tiling(piece, images);
            if (!t.ok)
              fail(out.check, "fiber product of " + xid + " and " + yid + " over " + sigma + ": " + t.reason);
          }
        }
      }
    }
  }
  for (const auto& [key, t] : z.complex.types)
    if (!found.count(key)) fail(out.check, z.name + " type " + key + " lies over no fiber product cone");
  return out;
}

namespace {

void semistable_checks(const FactorRun& r, const PullbackResult& pb, Report& report) {
  CheckResult morph = named("pulled_back_morphism[" + r.name + "]");
  for (const auto& v : validate_morphism(pb.induced)) fail(morph, v.cone + ": " + v.message);
  morph.checked = pb.induced.images.size();
  report.add(morph);

  SemistableReport sr = check_weak_semistable(pb.induced);
  CheckResult onto = named("cone_onto_cone[" + r.name + "]"), lattice = named("lattice_surjective[" + r.name + "]");
  for (const auto& c : sr.cones) {
    ++onto.checked;
    ++lattice.checked;
    if (!c.onto) fail(onto, c.cone + " at " + c.witness.to_string());
    if (!c.lattice) fail(lattice, c.cone + " at " + c.witness.to_string());
  }
  report.add(onto);
  report.add(lattice);
}

}  // namespace

void verify_theorem_hypotheses(const std::vector<const FactorRun*>& runs, const CurveModuliComplex& base,
                               const SubdivisionOf& s, Report& report) {
  for (const auto* r : runs) {
    CheckResult u = named("union_of_cones[" + r->name + "]");
    u.checked = r->images.pieces.size();
    UnionCheck uc = is_union_of_cones(s, r->images);
    if (!uc.ok) fail(u, "piece " + std::to_string(uc.piece) + " in " + uc.host + " at " + uc.witness.to_string());
    report.add(u);
  }
  for (const auto* r : runs) {
    PullbackResult pb = pullback_subdivision(r->complex.forgetful, s);
    semistable_checks(*r, pb, report);
  }
  if (runs.size() == 3) report.add(check_nu(*runs[0], *runs[1], *runs[2], base, s).check);
}

namespace {

std::string vector_string(const std::vector<long>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void contact_inputs(const ContactData& c, Report& r) {
  r.inputs.push_back({"g", std::to_string(c.g)});
  r.inputs.push_back({"n", std::to_string(c.n)});
  for (std::size_t i = 0; i < c.factors.size(); ++i)
    r.inputs.push_back({"A" + std::to_string(i + 1), vector_string(c.factors[i])});
}

void cycle_note(const FactorRun& r, Report& report) {
  if (r.contracted_cycle_types)
    report.notes.push_back(r.name + ": " + std::to_string(r.contracted_cycle_types) + " of " +
                           std::to_string(r.complex.types.size()) + " types have a cycle of slope zero");
}

}  // namespace

Report product_check(const ContactData& c, bool unimodularize) {
  c.validate();
  if (c.factors.empty()) throw Error(ErrorKind::InvalidInput, "product check needs at least one factor");
  if (c.factors.size() > 2) throw Error(ErrorKind::InvalidInput, "product check takes one or two factors");
  Report report;
  report.title = "product check";
  contact_inputs(c, report);
  report.inputs.push_back({"unimodularize", unimodularize ? "true" : "false"});
  CurveModuliComplex base = build_moduli_complex(c.g, c.n);

  std::vector<FactorRun> runs;
  runs.push_back(build_factor("X", enumerate_rubber_types(c, 0), base, c.single(0)));
  if (c.factors.size() == 2) {
    runs.push_back(build_factor("Y", enumerate_rubber_types(c, 1), base, c.single(1)));
    runs.push_back(build_factor("Z", enumerate_joint_types(c), base, c));
  } else {
    ContactData point{c.g, c.n, {}};
    runs.push_back(build_factor("Y", enumerate_joint_types(point), base, point));
    runs.push_back(build_factor("Z", runs.front().types, base, c));
    report.notes.push_back("Y is the space of constant maps (smooth target), so Z has the types of X");
  }
  std::vector<ConicalSubset> families;
  for (const auto& r : runs) families.push_back(r.images);
  SubdivisionOf s = build_gamma_subdivision(base, families, unimodularize);
  report.subdivision = summarize(s, unimodularize ? "covector arrangement, unimodular" : "covector arrangement");

  std::vector<const FactorRun*> ptrs;
  for (const auto& r : runs) {
    ptrs.push_back(&r);
    report.inputs.push_back({r.name + " types", std::to_string(r.complex.types.size())});
    cycle_note(r, report);
  }
  verify_theorem_hypotheses(ptrs, base, s, report);
  report.notes.push_back(kScopeStatement);
  return report;
}

DrSupport dr_support(const ContactData& c, std::size_t factor, bool unimodularize) {
  c.validate();
  if (factor >= c.factors.size()) throw Error(ErrorKind::InvalidInput, "no factor " + std::to_string(factor + 1));
  ContactData single = c.single(factor);
  CurveModuliComplex base = build_moduli_complex(c.g, c.n);
  DrSupport out{build_factor("X", enumerate_rubber_types(single, 0), base, single),
                identity_subdivision(base.complex), {}, {}};
  out.base = build_gamma_subdivision(base, {out.run.images}, unimodularize);

  Report& report = out.report;
  report.title = "double ramification support";
  contact_inputs(single, report);
  report.inputs.push_back({"X types", std::to_string(out.run.complex.types.size())});
  report.subdivision = summarize(out.base, "covector arrangement");

  CheckResult dims = named("support_dimension"), rigid = named("full_dimension_iff_rigid");
  for (const auto& id : out.run.complex.complex->maximal_cones()) {
    const auto& img = out.run.complex.forgetful.images.at(id);
    RationalCone cone = out.run.complex.complex->cone(id).image(img.map);
    std::size_t host_dim = base.complex->cone(img.target).dim();
    SupportCone sc{img.target, id, cone, host_dim, host_dim >= cone.dim() ? host_dim - cone.dim() : 0};
    ++dims.checked;
    ++rigid.checked;
    if (cone.dim() > host_dim) fail(dims, id + " has dimension above its host");
    bool full = moduli_cone(out.run.complex.types.at(id)).cone.dim() ==
                static_cast<std::size_t>(out.run.complex.types.at(id).graph.num_edges());
    if ((sc.codim == 0) != full) fail(rigid, id + " in " + img.target);
    out.cones.push_back(std::move(sc));
  }
  report.add(dims);
  report.add(rigid);
  cycle_note(out.run, report);
  verify_theorem_hypotheses({&out.run}, base, out.base, report);
  report.notes.push_back(kScopeStatement);
  return out;
}

RubberMapType figure1_type() {
  RubberMapType t;
  t.graph = theta_graph();
  t.graph.legs = {0, 1};
  t.slopes = {{-1, -1, -1}};
  t.leg_slopes = {{3, -3}};
  return t;
}

Report figure1_demo() {
  Report report;
  report.title = "figure 1: theta graph with contact (3,-3)";
  report.inputs = {{"g", "2"}, {"n", "2"}, {"A1", "3,-3"}};
  CurveModuliComplex base = build_moduli_complex(2, 2);
  RubberMapType t = figure1_type();

  CheckResult cone = named("moduli_cone_is_diagonal_ray");
  cone.checked = 1;
  ModuliCone mc = moduli_cone(t);
  if (mc.cone.dim() != 1 || mc.cone.rays() != std::vector<IntVector>{IntVector{1, 1, 1}})
    fail(cone, "moduli cone " + mc.cone.to_string());
  report.add(cone);

  FactorRun run = build_factor("X", {t}, base, {2, 2, {{3, -3}}});
  CheckResult closure = named("type_closure_is_ray_and_vertex");
  closure.checked = 1;
  if (run.complex.complex->size() != 2)
    fail(closure, std::to_string(run.complex.complex->size()) + " cones in the type closure");
  report.add(closure);

  StableImage img = forgetful_image(t);
  CheckResult before = named("not_union_of_cones_before");
  before.checked = 1;
  if (is_union_of_cones(*base.complex, run.images).ok) fail(before, "image is already a union of cones");
  report.add(before);
  CheckResult onto_before = named("cone_onto_cone_fails_before");
  onto_before.checked = 1;
  if (check_weak_semistable(run.complex.forgetful).ok()) fail(onto_before, "forgetful map is already semistable");
  report.add(onto_before);

  SubdivisionOf s = stellar_subdivide(base.complex, img.host, img.image.rays().at(0));
  report.subdivision = summarize(s, "stellar at the diagonal of " + img.host);
  verify_theorem_hypotheses({&run}, base, s, report);
  report.notes.push_back(kScopeStatement);
  return report;
}

}  // namespace tropprod
