#include "tropprod/complexes.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "tropprod/linalg.hpp"

namespace tropprod {

// ---------------------------------------------------------------- helpers

std::vector<IntVector> transformed_rays(const LinearMap& a, const RationalCone& c) {
  std::vector<IntVector> out;
  out.reserve(c.rays().size());
  for (const auto& r : c.rays()) out.push_back(a.apply(r).primitive());
  std::sort(out.begin(), out.end());
  return out;
}

RationalCone transform(const LinearMap& a, const RationalCone& c) { return c.image(a); }

LinearMap group_inverse(const std::vector<LinearMap>& group, const LinearMap& a) {
  for (const auto& b : group)
    if ((b * a).is_identity()) return b;
  throw std::logic_error("automorphism without inverse in its group");
}

namespace {

using RayKey = std::vector<IntVector>;

void add_unique(std::vector<RationalCone>& cells, std::set<RayKey>& seen, const RationalCone& c) {
  if (seen.insert(c.rays()).second) cells.push_back(c);
}

LinearMap left_inverse_or_throw(const LinearMap& f) {
  auto l = linalg::integer_left_inverse(f);
  if (!l) throw std::logic_error("face map has no integral left inverse");
  return *l;
}

}  // namespace

// ---------------------------------------------------------------- AbstractConeComplex

void AbstractConeComplex::add_cone(const ConeId& id, RationalCone cone, std::vector<LinearMap> auts) {
  const std::size_t rank = cone.ambient_rank();
  auts.push_back(LinearMap::identity(rank));
  for (const auto& a : auts)
    if (a.source_rank() != rank || a.target_rank() != rank)
      throw Error(ErrorKind::RankMismatch, "automorphism of cone " + id);
  std::sort(auts.begin(), auts.end());
  auts.erase(std::unique(auts.begin(), auts.end()), auts.end());
  cones_[id] = std::move(cone);
  auts_[id] = std::move(auts);
}

const RationalCone& AbstractConeComplex::cone(const ConeId& id) const {
  auto it = cones_.find(id);
  if (it == cones_.end()) throw Error(ErrorKind::InvalidInput, "unknown cone id " + id);
  return it->second;
}

const std::vector<LinearMap>& AbstractConeComplex::auts(const ConeId& id) const {
  auto it = auts_.find(id);
  if (it == auts_.end()) throw Error(ErrorKind::InvalidInput, "unknown cone id " + id);
  return it->second;
}

bool AbstractConeComplex::add_face(const ConeId& sub, const ConeId& super, const LinearMap& map) {
  if (map.source_rank() != cone(sub).ambient_rank() || map.target_rank() != cone(super).ambient_rank())
    throw Error(ErrorKind::RankMismatch, "face map " + sub + " -> " + super);
  if (!face_set_.emplace(sub, super, map).second) return false;
  faces_into_[super].push_back(faces_.size());
  faces_.push_back({sub, super, map});
  return true;
}

bool AbstractConeComplex::has_face(const ConeId& sub, const ConeId& super, const LinearMap& map) const {
  return face_set_.count({sub, super, map}) > 0;
}

std::vector<const FaceMap*> AbstractConeComplex::faces_into(const ConeId& super) const {
  std::vector<const FaceMap*> out;
  auto it = faces_into_.find(super);
  if (it == faces_into_.end()) return out;
  for (auto i : it->second) out.push_back(&faces_[i]);
  return out;
}

std::vector<const FaceMap*> AbstractConeComplex::faces_between(const ConeId& sub, const ConeId& super) const {
  std::vector<const FaceMap*> out;
  for (const auto* f : faces_into(super))
    if (f->sub == sub) out.push_back(f);
  return out;
}

void AbstractConeComplex::close_faces() {
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t n = faces_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const FaceMap f = faces_[i];
      for (const auto& a : auts(f.super))
        for (const auto& b : auts(f.sub)) changed |= add_face(f.sub, f.super, a * f.map * b);
      std::vector<std::size_t> below;
      if (auto it = faces_into_.find(f.sub); it != faces_into_.end()) below = it->second;
      for (auto j : below) {
        const FaceMap g = faces_[j];
        changed |= add_face(g.sub, f.super, f.map * g.map);
      }
    }
  }
}

std::vector<ConeId> AbstractConeComplex::maximal_cones() const {
  std::set<ConeId> subs;
  for (const auto& f : faces_) subs.insert(f.sub);
  std::vector<ConeId> out;
  for (const auto& [id, c] : cones_)
    if (!subs.count(id)) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_complex(const AbstractConeComplex& c) {
  std::vector<Violation> out;
  bool has_zero = false;
  for (const auto& [id, cone] : c.cones()) has_zero |= cone.is_zero();
  if (!has_zero) out.push_back({"", "complex has no zero cone"});

  for (const auto& [id, cone] : c.cones()) {
    const auto& group = c.auts(id);
    std::set<LinearMap> members(group.begin(), group.end());
    if (!members.count(LinearMap::identity(cone.ambient_rank())))
      out.push_back({id, "automorphism group lacks the identity"});
    for (const auto& a : group) {
      if (transformed_rays(a, cone) != cone.rays()) out.push_back({id, "automorphism does not preserve the cone"});
      for (const auto& b : group)
        if (!members.count(a * b)) {
          out.push_back({id, "automorphisms not closed under composition"});
          break;
        }
    }

    std::set<RayKey> represented;
    for (const auto* f : c.faces_into(id)) represented.insert(transformed_rays(f->map, c.cone(f->sub)));
    for (const auto& face : cone.faces()) {
      if (face == cone || (face.is_zero() && !has_zero)) continue;
      if (!represented.count(face.rays()))
        out.push_back({id, "face " + face.to_string() + " has no cone in the complex"});
    }
  }

  for (const auto& f : c.faces()) {
    const RationalCone& sub = c.cone(f.sub);
    const RationalCone& super = c.cone(f.super);
    RationalCone img = sub.image(f.map);
    if (!super.contains(img)) {
      out.push_back({f.super, "face map from " + f.sub + " leaves the cone"});
      continue;
    }
    if (img.dim() != sub.dim() || !lattice_surjective(f.map, sub, super)) {
      out.push_back({f.super, "face map from " + f.sub + " is not a lattice isomorphism onto its image"});
      continue;
    }
    if (!super.has_face(img) || img == super)
      out.push_back({f.super, "face map from " + f.sub + " does not land on a proper face"});
    for (const auto* g : c.faces_into(f.sub))
      if (!c.has_face(g->sub, f.super, f.map * g->map)) {
        out.push_back({f.super, "composition through " + f.sub + " from " + g->sub + " is missing"});
        break;
      }
    for (const auto& a : c.auts(f.super))
      if (!c.has_face(f.sub, f.super, a * f.map)) {
        out.push_back({f.super, "automorphisms do not permute the face maps from " + f.sub});
        break;
      }
    for (const auto& b : c.auts(f.sub))
      if (!c.has_face(f.sub, f.super, f.map * b)) {
        out.push_back({f.super, "face maps from " + f.sub + " not closed under its automorphisms"});
        break;
      }
  }
  return out;
}

AbstractConeComplex fan_complex(std::size_t rank, const std::vector<RationalCone>& cones,
                                const std::vector<LinearMap>& group_in) {
  std::vector<LinearMap> group = group_in;
  group.push_back(LinearMap::identity(rank));
  std::sort(group.begin(), group.end());
  group.erase(std::unique(group.begin(), group.end()), group.end());

  std::map<RayKey, RationalCone> all;
  for (const auto& c : cones) {
    if (c.ambient_rank() != rank) throw Error(ErrorKind::RankMismatch, "fan cone " + c.to_string());
    for (const auto& f : c.faces()) all.emplace(f.rays(), f);
  }
  std::vector<RationalCone> sorted;
  for (auto& [k, c] : all) sorted.push_back(c);
  std::sort(sorted.begin(), sorted.end());

  std::vector<RationalCone> reps;
  std::set<RayKey> covered;
  for (const auto& c : sorted) {
    if (covered.count(c.rays())) continue;
    for (const auto& g : group) {
      RayKey k = transformed_rays(g, c);
      if (!all.count(k)) throw Error(ErrorKind::InvalidInput, "group does not preserve the fan");
      covered.insert(k);
    }
    reps.push_back(c);
  }

  AbstractConeComplex out;
  auto name = [](std::size_t i) { return "c" + std::to_string(i); };
  for (std::size_t i = 0; i < reps.size(); ++i) {
    std::vector<LinearMap> stab;
    for (const auto& g : group)
      if (transformed_rays(g, reps[i]) == reps[i].rays()) stab.push_back(g);
    out.add_cone(name(i), reps[i], stab);
  }
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (const auto& face : reps[i].faces()) {
      if (face == reps[i]) continue;
      for (std::size_t j = 0; j < reps.size(); ++j) {
        if (reps[j].dim() != face.dim()) continue;
        for (const auto& g : group)
          if (transformed_rays(g, reps[j]) == face.rays()) out.add_face(name(j), name(i), g);
      }
    }
  return out;
}

std::vector<Violation> validate_morphism(const ComplexMorphism& f) {
  std::vector<Violation> out;
  for (const auto& [id, cone] : f.source->cones()) {
    auto it = f.images.find(id);
    if (it == f.images.end()) {
      out.push_back({id, "cone has no image"});
      continue;
    }
    if (!f.target->has_cone(it->second.target)) {
      out.push_back({id, "image cone " + it->second.target + " missing from target"});
      continue;
    }
    const auto& tc = f.target->cone(it->second.target);
    const auto& m = it->second.map;
    if (m.source_rank() != cone.ambient_rank() || m.target_rank() != tc.ambient_rank()) {
      out.push_back({id, "map has the wrong shape"});
      continue;
    }
    if (!tc.contains(cone.image(m))) out.push_back({id, "image leaves " + it->second.target});
  }
  if (!out.empty()) return out;
  for (const auto& face : f.source->faces()) {
    const auto& ia = f.images.at(face.sub);
    const auto& ib = f.images.at(face.super);
    LinearMap lhs = ib.map * face.map;
    const auto& rays = f.source->cone(face.sub).rays();
    auto agrees = [&](const LinearMap& e) {
      LinearMap rhs = e * ia.map;
      return std::all_of(rays.begin(), rays.end(), [&](const IntVector& r) { return rhs.apply(r) == lhs.apply(r); });
    };
    bool found = false;
    if (ia.target == ib.target)
      for (const auto& a : f.target->auts(ib.target))
        if (agrees(a)) {
          found = true;
          break;
        }
    if (!found)
      for (const auto* e : f.target->faces_between(ia.target, ib.target))
        if (agrees(e->map)) {
          found = true;
          break;
        }
    if (!found) out.push_back({face.super, "not compatible with the face map from " + face.sub});
  }
  return out;
}

ComplexMorphism compose(const ComplexMorphism& g, const ComplexMorphism& f) {
  ComplexMorphism out;
  out.source = f.source;
  out.target = g.target;
  for (const auto& [id, img] : f.images) {
    const auto& next = g.images.at(img.target);
    out.images[id] = {next.target, next.map * img.map};
  }
  return out;
}

std::vector<ConicalPiece> ConicalSubset::closure() const {
  std::vector<ConicalPiece> out;
  std::set<std::pair<ConeId, RayKey>> seen;
  for (const auto& p : pieces)
    for (const auto& f : p.cone.faces())
      if (seen.emplace(p.host, f.rays()).second) out.push_back({p.host, f});
  return out;
}

// ---------------------------------------------------------------- subdivisions

namespace {

// Refined cones grouped by host.
std::map<ConeId, std::vector<ConeId>> cells_by_host(const SubdivisionOf& s) {
  std::map<ConeId, std::vector<ConeId>> out;
  for (const auto& [id, img] : s.proj.images) out[img.target].push_back(id);
  return out;
}

struct RepMatch {
  ConeId id;
  std::vector<LinearMap> auts;  // host automorphisms a with a(rep) = cone
};

RepMatch find_rep(const AbstractConeComplex& refined, const std::vector<ConeId>& candidates,
                  const std::vector<LinearMap>& host_auts, const RationalCone& cone) {
  for (const auto& id : candidates) {
    const auto& rep = refined.cone(id);
    if (rep.dim() != cone.dim() || rep.rays().size() != cone.rays().size()) continue;
    RepMatch m{id, {}};
    for (const auto& a : host_auts)
      if (transformed_rays(a, rep) == cone.rays()) m.auts.push_back(a);
    if (!m.auts.empty()) return m;
  }
  throw std::logic_error("cell " + cone.to_string() + " has no representative");
}

}  // namespace

std::vector<RationalCone> SubdivisionOf::cells(const ConeId& host) const {
  const RationalCone& h = original->cone(host);
  std::vector<RationalCone> out;
  std::set<RayKey> seen;
  for (const auto& [id, img] : proj.images) {
    if (img.target != host) continue;
    const auto& c = refined->cone(id);
    if (c.dim() != h.dim()) continue;
    for (const auto& a : original->auts(host)) {
      RayKey k = transformed_rays(a, c);
      if (seen.count(k)) continue;
      add_unique(out, seen, a.is_identity() ? c : transform(a, c));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RationalCone> SubdivisionOf::all_cells(const ConeId& host) const {
  std::vector<RationalCone> out;
  std::set<RayKey> seen;
  for (const auto& c : cells(host))
    for (const auto& f : c.faces()) add_unique(out, seen, f);
  std::sort(out.begin(), out.end());
  return out;
}

bool SubdivisionOf::is_identity() const {
  if (refined->size() != original->size()) return false;
  for (const auto& [id, c] : refined->cones())
    if (!original->has_cone(id)) return false;
  return true;
}

SubdivisionOf assemble_subdivision(std::shared_ptr<const AbstractConeComplex> original,
                                   const std::map<ConeId, std::vector<RationalCone>>& given) {
  const AbstractConeComplex& orig = *original;
  std::map<ConeId, std::vector<RationalCone>> full;
  std::map<ConeId, std::vector<RationalCone>> faces_of_cells;
  std::map<ConeId, std::vector<RationalCone>> interior;
  std::set<ConeId> unrefined;

  for (const auto& [id, h] : orig.cones()) {
    auto it = given.find(id);
    std::vector<RationalCone> cells;
    if (it == given.end()) {
      cells = {h};
    } else {
      std::set<RayKey> seen;
      for (const auto& c : it->second) add_unique(cells, seen, c);
    }
    // Untouched hosts keep their cone and faces; skip the face enumeration.
    if (cells.size() == 1 && cells.front() == h) {
      unrefined.insert(id);
      interior[id] = {h};
      continue;
    }
    for (const auto& c : cells)
      if (c.dim() != h.dim() || c.ambient_rank() != h.ambient_rank())
        throw std::logic_error("cell " + c.to_string() + " is not full-dimensional in " + id);
    if (cells.size() > 1 || !(cells.front() == h)) {
      auto t = check_tiling(h, cells);
      if (!t.ok) throw std::logic_error("cells of " + id + " do not tile it: " + t.reason);
    }
    std::set<RayKey> keys;
    for (const auto& c : cells) keys.insert(c.rays());
    for (const auto& a : orig.auts(id))
      for (const auto& c : cells)
        if (!keys.count(transformed_rays(a, c)))
          throw std::logic_error("cells of " + id + " are not invariant under its automorphisms");

    std::vector<RationalCone> fcs, inner;
    std::set<RayKey> seen;
    for (const auto& c : cells)
      for (const auto& f : c.faces()) {
        if (!seen.insert(f.rays()).second) continue;
        fcs.push_back(f);
        if (h.in_relative_interior(f.interior_point())) inner.push_back(f);
      }
    std::sort(inner.begin(), inner.end());
    full[id] = std::move(cells);
    faces_of_cells[id] = std::move(fcs);
    interior[id] = std::move(inner);
  }

  for (const auto& f : orig.faces()) {
    if (unrefined.count(f.super) && unrefined.count(f.sub)) continue;
    if (unrefined.count(f.super)) {
      const RationalCone& h = orig.cone(f.super);
      for (const auto& c : h.faces()) faces_of_cells[f.super].push_back(c);
      unrefined.erase(f.super);
    }
    RationalCone face = transform(f.map, orig.cone(f.sub));
    std::set<RayKey> expected, found;
    for (const auto& c : interior[f.sub]) expected.insert(transformed_rays(f.map, c));
    for (const auto& c : faces_of_cells[f.super])
      if (face.in_relative_interior(c.interior_point())) found.insert(c.rays());
    if (expected != found)
      throw std::logic_error("cells of " + f.super + " and " + f.sub + " do not agree along their common face");
  }

  auto refined = std::make_shared<AbstractConeComplex>();
  SubdivisionOf s;
  s.original = original;
  s.proj.target = original;

  std::map<ConeId, std::vector<ConeId>> reps_of;
  for (const auto& [id, h] : orig.cones()) {
    const auto& group = orig.auts(id);
    const auto& inner = interior[id];
    const bool untouched = inner.size() == 1 && inner.front() == h;
    std::set<RayKey> covered;
    std::size_t k = 0;
    for (const auto& c : inner) {
      if (covered.count(c.rays())) continue;
      std::vector<LinearMap> stab;
      for (const auto& a : group) {
        RayKey key = transformed_rays(a, c);
        if (key == c.rays()) stab.push_back(a);
        covered.insert(std::move(key));
      }
      ConeId rid = untouched ? id : id + "#" + std::to_string(k++);
      refined->add_cone(rid, c, stab);
      reps_of[id].push_back(rid);
      s.proj.images[rid] = {id, LinearMap::identity(h.ambient_rank())};
    }
  }

  std::map<const FaceMap*, LinearMap> left_inverses;
  for (const auto& [host, reps] : reps_of) {
    const RationalCone& h = orig.cone(host);
    if (unrefined.count(host)) {
      for (const auto* g : orig.faces_into(host)) refined->add_face(g->sub, host, g->map);
      continue;
    }
    for (const auto& rid : reps) {
      const RationalCone rho = refined->cone(rid);
      for (const auto& psi : rho.faces()) {
        if (psi == rho) continue;
        RationalCone mh = h.minimal_face_containing(psi);
        if (mh == h) {
          RepMatch m = find_rep(*refined, reps, orig.auts(host), psi);
          for (const auto& a : m.auts) refined->add_face(m.id, rid, a);
          continue;
        }
        for (const auto* g : orig.faces_into(host)) {
          if (transformed_rays(g->map, orig.cone(g->sub)) != mh.rays()) continue;
          auto li = left_inverses.find(g);
          if (li == left_inverses.end()) li = left_inverses.emplace(g, left_inverse_or_throw(g->map)).first;
          RationalCone pre = transform(li->second, psi);
          RepMatch m = find_rep(*refined, reps_of[g->sub], orig.auts(g->sub), pre);
          for (const auto& a : m.auts) refined->add_face(m.id, rid, g->map * a);
        }
      }
    }
  }

  s.refined = refined;
  s.proj.source = refined;
  return s;
}

SubdivisionOf identity_subdivision(std::shared_ptr<const AbstractConeComplex> original) {
  return assemble_subdivision(std::move(original), {});
}

SubdivisionOf compose(const SubdivisionOf& outer, const SubdivisionOf& inner) {
  if (inner.original != outer.refined) throw Error(ErrorKind::InvalidInput, "subdivisions do not compose");
  std::map<ConeId, std::vector<RationalCone>> cells;
  for (const auto& [rid, img] : outer.proj.images) {
    if (!img.map.is_identity()) throw std::logic_error("refined cone " + rid + " is not in host coordinates");
    const RationalCone& host = outer.original->cone(img.target);
    if (outer.refined->cone(rid).dim() != host.dim()) continue;
    auto& out = cells[img.target];
    for (const auto& c : inner.cells(rid))
      for (const auto& a : outer.original->auts(img.target)) out.push_back(transform(a, c));
  }
  return assemble_subdivision(outer.original, cells);
}

namespace {

// Cells and refined cones per host, computed once for repeated lookups.
struct CellIndex {
  const SubdivisionOf& s;
  std::map<ConeId, std::vector<ConeId>> by_host;
  std::map<ConeId, std::vector<RationalCone>> cells;

  explicit CellIndex(const SubdivisionOf& sub) : s(sub), by_host(cells_by_host(sub)) {}

  const std::vector<RationalCone>& of(const ConeId& host) {
    auto it = cells.find(host);
    if (it == cells.end()) it = cells.emplace(host, s.cells(host)).first;
    return it->second;
  }
};

CellLocation locate_in(CellIndex& index, const ConeId& host, const RationalCone& cone) {
  const SubdivisionOf& s = index.s;
  const AbstractConeComplex& orig = *s.original;
  const RationalCone& h = orig.cone(host);
  std::optional<RationalCone> phi;
  for (const auto& c : index.of(host))
    if (c.contains(cone)) {
      phi = c.minimal_face_containing(cone);
      break;
    }
  if (!phi) throw std::logic_error("cone " + cone.to_string() + " is not inside " + host);
  RationalCone mh = h.minimal_face_containing(*phi);
  if (mh == h) {
    RepMatch m = find_rep(*s.refined, index.by_host[host], orig.auts(host), *phi);
    return {m.id, group_inverse(orig.auts(host), m.auts.front())};
  }
  for (const auto* g : orig.faces_into(host)) {
    if (transformed_rays(g->map, orig.cone(g->sub)) != mh.rays()) continue;
    LinearMap l = left_inverse_or_throw(g->map);
    RepMatch m = find_rep(*s.refined, index.by_host[g->sub], orig.auts(g->sub), transform(l, *phi));
    return {m.id, group_inverse(orig.auts(g->sub), m.auts.front()) * l};
  }
  throw std::logic_error("face of " + host + " has no cone in the complex");
}

}  // namespace

CellLocation locate_cell(const SubdivisionOf& s, const ConeId& host, const RationalCone& cone) {
  CellIndex index(s);
  return locate_in(index, host, cone);
}

namespace {

std::map<ConeId, std::vector<const FaceMap*>> faces_from(const AbstractConeComplex& c) {
  std::map<ConeId, std::vector<const FaceMap*>> out;
  for (const auto& f : c.faces()) out[f.sub].push_back(&f);
  return out;
}

std::vector<RationalCone> stellar_insert(const std::vector<RationalCone>& cells, const IntVector& p) {
  std::vector<RationalCone> out;
  for (const auto& c : cells) {
    if (!c.contains(p) || std::binary_search(c.rays().begin(), c.rays().end(), p)) {
      out.push_back(c);
      continue;
    }
    for (const auto& f : c.facets()) {
      if (dot(f, p) == 0) continue;
      std::vector<IntVector> gens{p};
      for (const auto& r : c.rays())
        if (dot(f, r) == 0) gens.push_back(r);
      out.push_back(RationalCone::from_generators(c.ambient_rank(), gens));
    }
  }
  return out;
}

}  // namespace

SubdivisionOf stellar_subdivide(std::shared_ptr<const AbstractConeComplex> c, const ConeId& id,
                                const IntVector& ray) {
  const RationalCone& cone = c->cone(id);
  if (ray.rank() != cone.ambient_rank()) throw Error(ErrorKind::RankMismatch, "stellar ray " + ray.to_string());
  if (ray.is_zero() || !cone.contains(ray))
    throw Error(ErrorKind::RayOutside, ray.to_string() + " is not in cone " + id);

  auto up = faces_from(*c);
  std::map<ConeId, std::set<IntVector>> points;
  std::vector<std::pair<ConeId, IntVector>> work;
  auto add = [&](const ConeId& h, const IntVector& p) {
    if (points[h].insert(p).second) work.emplace_back(h, p);
  };
  add(id, ray.primitive());
  while (!work.empty()) {
    auto [h, p] = work.back();
    work.pop_back();
    for (const auto& a : c->auts(h)) add(h, a.apply(p));
    for (const auto* f : up[h]) add(f->super, f->map.apply(p));
    for (const auto* f : c->faces_into(h)) {
      LinearMap l = left_inverse_or_throw(f->map);
      IntVector q = l.apply(p);
      if (f->map.apply(q) == p && c->cone(f->sub).contains(q)) add(f->sub, q);
    }
  }

  // Cones are refined in order of dimension: each one is the cone over its
  // already refined boundary from its inserted point, or from its ray sum
  // when only the boundary changed.
  std::vector<ConeId> order;
  for (const auto& [h, cone_h] : c->cones()) order.push_back(h);
  std::stable_sort(order.begin(), order.end(),
                   [&](const ConeId& a, const ConeId& b) { return c->cone(a).dim() < c->cone(b).dim(); });
  std::map<ConeId, std::vector<RationalCone>> cells;
  for (const auto& h : order) {
    const RationalCone& hc = c->cone(h);
    std::vector<IntVector> inner;
    for (const auto& p : points[h])
      if (hc.in_relative_interior(p)) inner.push_back(p);
    std::vector<RationalCone> boundary;
    std::set<RayKey> seen;
    bool refined = false;
    for (const auto* f : c->faces_into(h)) {
      const RationalCone& sub = c->cone(f->sub);
      if (sub.dim() + 1 != hc.dim()) continue;
      const auto& sc = cells.at(f->sub);
      if (sc.size() != 1 || !(sc.front() == sub)) refined = true;
      for (const auto& x : sc) add_unique(boundary, seen, transform(f->map, x));
    }
    if (hc.dim() <= 1 || (inner.empty() && !refined)) {
      cells[h] = {hc};
      continue;
    }
    IntVector centre(hc.ambient_rank());
    if (inner.empty()) centre = hc.interior_point().primitive();
    for (const auto& p : inner) centre += p;
    centre = centre.primitive();
    std::vector<RationalCone> cur;
    for (const auto& b : boundary) {
      std::vector<IntVector> gens = b.rays();
      gens.push_back(centre);
      cur.push_back(RationalCone::from_generators(hc.ambient_rank(), gens));
    }
    if (inner.size() > 1) {
      for (const auto& p : inner) cur = stellar_insert(cur, p);
      std::set<RayKey> keys;
      for (const auto& x : cur) keys.insert(x.rays());
      for (const auto& a : c->auts(h))
        for (const auto& x : cur)
          if (!keys.count(transformed_rays(a, x)))
            throw Error(ErrorKind::InvalidInput, "the orbit of " + ray.to_string() + " meets the interior of " + h +
                                                     " in several points with no invariant stellar subdivision");
    }
    cells[h] = std::move(cur);
  }
  return assemble_subdivision(c, cells);
}

namespace {

std::optional<IntVector> normalize_covector(const RationalCone& host, const IntVector& u) {
  IntVector v = primitive_from_rational(linalg::project_off(u, host.span_equations()));
  if (v.is_zero()) return std::nullopt;
  return v.normalized_line();
}

std::vector<RationalCone> slice(std::vector<RationalCone> cells, const std::set<IntVector>& covectors) {
  for (const auto& u : covectors) {
    std::vector<RationalCone> next;
    for (const auto& c : cells) {
      bool pos = false, neg = false;
      for (const auto& r : c.rays()) {
        int s = sgn(dot(u, r));
        pos |= s > 0;
        neg |= s < 0;
      }
      if (!(pos && neg)) {
        next.push_back(c);
        continue;
      }
      for (const auto& w : {u, -u}) {
        std::vector<IntVector> ineq = c.facets();
        ineq.push_back(w);
        next.push_back(RationalCone::from_inequalities(c.ambient_rank(), ineq, c.span_equations()));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

}  // namespace

SubdivisionOf hyperplane_refine(std::shared_ptr<const AbstractConeComplex> c,
                                const std::map<ConeId, std::vector<IntVector>>& covectors) {
  // Covectors are closed under automorphisms and restriction to faces only.
  std::map<ConeId, std::set<IntVector>> pool;
  std::vector<std::pair<ConeId, IntVector>> work;
  // Covectors that are one-signed on a cone cut neither it nor its faces.
  auto add = [&](const ConeId& h, const IntVector& u) {
    const RationalCone& hc = c->cone(h);
    bool pos = false, neg = false;
    for (const auto& r : hc.rays()) {
      int s = sgn(dot(u, r));
      pos |= s > 0;
      neg |= s < 0;
    }
    if (!(pos && neg)) return;
    auto v = normalize_covector(hc, u);
    if (v && pool[h].insert(*v).second) work.emplace_back(h, *v);
  };
  for (const auto& [h, us] : covectors)
    for (const auto& u : us) {
      if (u.rank() != c->cone(h).ambient_rank()) throw Error(ErrorKind::RankMismatch, "covector for " + h);
      add(h, u);
    }
  while (!work.empty()) {
    auto [h, u] = work.back();
    work.pop_back();
    for (const auto& a : c->auts(h)) add(h, a.pullback(u));
    for (const auto* f : c->faces_into(h)) add(f->sub, f->map.pullback(u));
  }

  // Cones are sliced in order of dimension. When the slices of a cone do not
  // restrict to the cells already chosen on its facets, the cone is first
  // coned over those cells from its ray sum.
  std::vector<ConeId> order;
  for (const auto& [h, cone_h] : c->cones()) order.push_back(h);
  std::stable_sort(order.begin(), order.end(),
                   [&](const ConeId& a, const ConeId& b) { return c->cone(a).dim() < c->cone(b).dim(); });
  std::map<ConeId, std::vector<RationalCone>> cells;
  for (const auto& h : order) {
    const RationalCone& hc = c->cone(h);
    const std::set<IntVector>& us = pool[h];
    std::vector<RationalCone> cur = slice({hc}, us);
    std::vector<RationalCone> expected;
    std::set<RayKey> want;
    for (const auto* f : c->faces_into(h)) {
      if (c->cone(f->sub).dim() + 1 != hc.dim()) continue;
      for (const auto& x : cells.at(f->sub)) add_unique(expected, want, transform(f->map, x));
    }
    std::set<RayKey> have;
    for (const auto& x : cur)
      for (const auto& y : x.faces())
        if (y.dim() + 1 == hc.dim() && !hc.in_relative_interior(y.interior_point())) have.insert(y.rays());
    if (hc.dim() > 1 && have != want) {
      IntVector centre = hc.interior_point().primitive();
      std::vector<RationalCone> coned;
      for (const auto& b : expected) {
        std::vector<IntVector> gens = b.rays();
        gens.push_back(centre);
        coned.push_back(RationalCone::from_generators(hc.ambient_rank(), gens));
      }
      cur = slice(std::move(coned), us);
    }
    cells[h] = std::move(cur);
  }
  return assemble_subdivision(c, cells);
}

SubdivisionOf common_refinement(const SubdivisionOf& s1, const SubdivisionOf& s2) {
  if (s1.original != s2.original) throw Error(ErrorKind::InvalidInput, "subdivisions of different complexes");
  std::map<ConeId, std::vector<RationalCone>> cells;
  for (const auto& [id, h] : s1.original->cones()) {
    auto a = s1.cells(id), b = s2.cells(id);
    std::vector<RationalCone> out;
    std::set<RayKey> seen;
    for (const auto& x : a)
      for (const auto& y : b) {
        RationalCone z = intersect(x, y);
        if (z.dim() == h.dim()) add_unique(out, seen, z);
      }
    cells[id] = std::move(out);
  }
  return assemble_subdivision(s1.original, cells);
}

PullbackResult pullback_subdivision(const ComplexMorphism& f, const SubdivisionOf& s) {
  if (f.target != s.original) throw Error(ErrorKind::InvalidInput, "subdivision is not of the morphism's target");
  CellIndex index(s);
  std::map<ConeId, std::vector<RationalCone>> cells;
  for (const auto& [id, tau] : f.source->cones()) {
    const auto& img = f.images.at(id);
    std::vector<RationalCone> out;
    std::set<RayKey> seen;
    for (const auto& c : index.of(img.target)) {
      std::vector<IntVector> ineq = tau.facets(), eq = tau.span_equations();
      for (const auto& u : c.facets()) ineq.push_back(img.map.pullback(u));
      for (const auto& e : c.span_equations()) eq.push_back(img.map.pullback(e));
      RationalCone p = RationalCone::from_inequalities(tau.ambient_rank(), ineq, eq);
      if (p.dim() == tau.dim()) add_unique(out, seen, p);
    }
    cells[id] = std::move(out);
  }

  PullbackResult result{assemble_subdivision(f.source, cells), {}};
  const SubdivisionOf& sub = result.subdivision;
  result.induced.source = sub.refined;
  result.induced.target = s.refined;
  for (const auto& [rid, host] : sub.proj.images) {
    const auto& img = f.images.at(host.target);
    RationalCone rho = sub.refined->cone(rid);
    CellLocation loc = locate_in(index, img.target, rho.image(img.map));
    result.induced.images[rid] = {loc.cell, loc.map * img.map};
  }
  return result;
}

namespace {

std::optional<IntVector> union_witness(const RationalCone& piece, const std::vector<RationalCone>& cells) {
  for (const auto& phi : cells) {
    RationalCone q = intersect(phi, piece);
    if (q.is_zero()) continue;
    IntVector w = q.interior_point();
    if (phi.in_relative_interior(w) && !piece.contains(phi)) return w;
  }
  return std::nullopt;
}

}  // namespace

UnionCheck is_union_of_cones(const AbstractConeComplex& c, const ConicalSubset& s) {
  for (std::size_t i = 0; i < s.pieces.size(); ++i) {
    const auto& p = s.pieces[i];
    const RationalCone& h = c.cone(p.host);
    if (!h.contains(p.cone)) return {false, i, p.host, p.cone.interior_point()};
    if (auto w = union_witness(p.cone, h.faces())) return {false, i, p.host, *w};
  }
  return {};
}

UnionCheck is_union_of_cones(const SubdivisionOf& s, const ConicalSubset& subset) {
  for (std::size_t i = 0; i < subset.pieces.size(); ++i) {
    const auto& p = subset.pieces[i];
    const RationalCone& h = s.original->cone(p.host);
    if (!h.contains(p.cone)) return {false, i, p.host, p.cone.interior_point()};
    if (auto w = union_witness(p.cone, s.all_cells(p.host))) return {false, i, p.host, *w};
  }
  return {};
}

namespace {

// Basis of the span of `rows` made of minimal-support vectors, preferring
// short supports and small entries.
std::vector<IntVector> sparse_basis(const std::vector<IntVector>& rows) {
  const std::size_t k = rows.size();
  if (k <= 1) return rows;
  const std::size_t n = rows.front().rank();
  std::set<IntVector> circuits;
  std::vector<std::size_t> zeros(k - 1);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t at, std::size_t from) {
    if (at == zeros.size()) {
      std::vector<IntVector> eqs;
      for (auto z : zeros) {
        IntVector e(k);
        for (std::size_t i = 0; i < k; ++i) e[i] = rows[i][z];
        eqs.push_back(e);
      }
      auto ker = linalg::kernel(eqs, k);
      if (ker.size() != 1) return;
      IntVector x(n);
      for (std::size_t i = 0; i < k; ++i) x += ker[0][i] * rows[i];
      circuits.insert(x.normalized_line());
      return;
    }
    for (std::size_t z = from; z < n; ++z) {
      zeros[at] = z;
      rec(at + 1, z + 1);
    }
  };
  rec(0, 0);
  std::vector<IntVector> sorted(circuits.begin(), circuits.end());
  auto weight = [](const IntVector& v) {
    std::size_t support = 0;
    Int size = 0;
    for (const auto& x : v.coords()) {
      support += sgn(x) != 0;
      size += abs(x);
    }
    return std::make_pair(support, size);
  };
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](const IntVector& a, const IntVector& b) { return weight(a) < weight(b); });
  std::vector<IntVector> basis;
  for (const auto& v : sorted) {
    basis.push_back(v);
    if (linalg::rank(basis) < basis.size()) basis.pop_back();
    if (basis.size() == k) break;
  }
  return basis;
}

}  // namespace

SubdivisionOf refine_until_conical(std::shared_ptr<const AbstractConeComplex> c, const ConicalSubset& s,
                                   bool unimodular) {
  if (is_union_of_cones(*c, s).ok) {
    SubdivisionOf id = identity_subdivision(c);
    return unimodular ? unimodularize(id) : id;
  }
  std::map<ConeId, std::vector<IntVector>> covectors;
  for (const auto& p : s.pieces) {
    auto& out = covectors[p.host];
    const RationalCone& h = c->cone(p.host);
    for (auto& u : sparse_basis(p.cone.span_equations())) out.push_back(u);
    if (!(RationalCone::from_inequalities(h.ambient_rank(), h.facets(), p.cone.span_equations()) == p.cone))
      out.insert(out.end(), p.cone.facets().begin(), p.cone.facets().end());
  }
  SubdivisionOf sub = hyperplane_refine(c, covectors);
  if (!is_union_of_cones(sub, s).ok) throw std::logic_error("refinement left a piece that is not a union of cones");
  if (unimodular) {
    sub = unimodularize(sub);
    if (!is_union_of_cones(sub, s).ok) throw std::logic_error("unimodularization broke the union of cones");
  }
  return sub;
}

namespace {

// Smallest nonzero lattice point of the half-open parallelepiped of a
// simplicial cone.
IntVector parallelepiped_point(const RationalCone& c) {
  const Int m = multiplicity(c);
  const std::size_t d = c.rays().size();
  const unsigned long mm = m.get_ui();
  std::vector<unsigned long> k(d, 0);
  std::optional<IntVector> best;
  unsigned long best_sum = 0;
  std::vector<unsigned long> best_k;
  while (true) {
    std::size_t i = 0;
    while (i < d && ++k[i] == mm) k[i++] = 0;
    if (i == d) break;
    IntVector x(c.ambient_rank());
    unsigned long sum = 0;
    for (std::size_t j = 0; j < d; ++j) {
      x += Int(k[j]) * c.rays()[j];
      sum += k[j];
    }
    if (x.content() % m != 0) continue;
    if (!best || sum < best_sum || (sum == best_sum && k < best_k)) {
      best = x;
      best_sum = sum;
      best_k = k;
    }
  }
  if (!best) throw std::logic_error("no interior lattice point in a cone of multiplicity > 1");
  return best->primitive();
}

}  // namespace

SubdivisionOf unimodularize(const SubdivisionOf& s) {
  SubdivisionOf cur = s;
  for (int round = 0; round < 500; ++round) {
    std::optional<std::pair<std::size_t, ConeId>> worst;
    for (const auto& [id, c] : cur.refined->cones())
      if (!is_unimodular(c) && (!worst || c.dim() < worst->first)) worst = std::make_pair(c.dim(), id);
    if (!worst) return cur;
    const RationalCone& c = cur.refined->cone(worst->second);
    IntVector p = c.is_simplicial() ? parallelepiped_point(c) : c.interior_point().primitive();
    cur = compose(cur, stellar_subdivide(cur.refined, worst->second, p));
  }
  throw std::logic_error("unimodularization did not terminate");
}

bool SemistableReport::ok() const { return failures() == 0; }

std::size_t SemistableReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(cones.begin(), cones.end(), [](const ConeCheck& c) { return !c.onto || !c.lattice; }));
}

SemistableReport check_weak_semistable(const ComplexMorphism& f) {
  SemistableReport report;
  for (const auto& [id, tau] : f.source->cones()) {
    const auto& img = f.images.at(id);
    const RationalCone& sigma = f.target->cone(img.target);
    RationalCone image = tau.image(img.map);
    ConeCheck check{id, true, true, {}};
    if (!sigma.contains(image)) {
      check.onto = check.lattice = false;
    } else {
      check.onto = sigma.minimal_face_containing(image) == image;
      check.lattice = lattice_surjective(img.map, tau, sigma);
    }
    if (!check.onto || !check.lattice) check.witness = tau.interior_point();
    report.cones.push_back(std::move(check));
  }
  return report;
}

}  // namespace tropprod
