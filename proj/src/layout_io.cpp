#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lm/layout.hpp"

namespace lm {

using json = nlohmann::ordered_json;

namespace {

json point_to_json(const Point& p) { return json::array({p.x(), p.y()}); }

Point point_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::runtime_error(where + ": expected [x, y] coordinate pair");
  return Point(j[0].get<double>(), j[1].get<double>());
}

json polygon_to_json(const Polygon& poly) {
  json arr = json::array();
  for (const Point& p : poly.vertices()) arr.push_back(point_to_json(p));
  return arr;
}

Polygon polygon_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 3)
    throw std::runtime_error(where + ": polygon needs >= 3 vertices");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < j.size(); ++i)
    pts.push_back(point_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  try {
    return Polygon(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

double require_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::runtime_error(where + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

int require_int(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw std::runtime_error(where + ": missing integer field '" + key + "'");
  return j[key].get<int>();
}

}  // namespace

void validate_layout(const Layout& layout) {
  if (layout.dras.empty()) throw std::runtime_error("layout: needs at least one DRA");

  std::set<int> ids;
  for (const Dra& d : layout.dras) {
    const std::string where = "dra " + std::to_string(d.id);
    if (d.rules.d_gap <= 0 || d.rules.d_obs <= 0 || d.rules.d_protect <= 0 ||
        d.rules.trace_width <= 0)
      throw std::runtime_error(where + ": rules must be strictly positive");
    if (d.rules.d_protect > d.rules.d_gap + kEpsGeom)
      throw std::runtime_error(where + ": d_protect must not exceed d_gap");
    if (!d.region.is_simple())
      throw std::runtime_error(where + ": region polygon is self-intersecting");
  }

  for (const Trace& t : layout.traces) {
    const std::string where = "trace " + std::to_string(t.id);
    if (!ids.insert(t.id).second)
      throw std::runtime_error(where + ": duplicate id");
    if (t.nodes.size() < 2)
      throw std::runtime_error(where + ": trace needs >=2 nodes");
    if (t.width <= 0) throw std::runtime_error(where + ": width must be positive");
    for (std::size_t i = 0; i + 1 < t.nodes.size(); ++i)
      if (points_equal(t.nodes[i], t.nodes[i + 1]))
        throw std::runtime_error(where + ": consecutive nodes coincide at node " +
                                 std::to_string(i));
    for (std::size_t i = 1; i + 1 < t.nodes.size(); ++i) {
      const Point din = (t.nodes[i] - t.nodes[i - 1]).normalized();
      const Point dout = (t.nodes[i + 1] - t.nodes[i]).normalized();
      if (din.dot(dout) < -kEpsGeom)
        throw std::runtime_error(where + ": acute turn at node " + std::to_string(i));
    }
  }

  for (const DifferentialPair& p : layout.pairs) {
    const std::string where = "pair " + std::to_string(p.id);
    if (!ids.insert(p.id).second)
      throw std::runtime_error(where + ": duplicate id");
    const Trace* tp = layout.find_trace(p.trace_p);
    const Trace* tn = layout.find_trace(p.trace_n);
    if (!tp || !tn) throw std::runtime_error(where + ": unknown sub-trace id");
    if (std::abs(tp->width - tn->width) > kEpsGeom)
      throw std::runtime_error(where + ": sub-traces must share one width");
    if (p.gap <= 0) throw std::runtime_error(where + ": gap must be positive");
    if (p.breakout_p < 0 || p.breakout_p >= int(tp->nodes.size()) ||
        p.breakout_n < 0 || p.breakout_n >= int(tn->nodes.size()))
      throw std::runtime_error(where + ": breakout exceeds node count");
  }

  for (const Polygon& obs : layout.obstacles)
    if (!obs.is_simple())
      throw std::runtime_error("obstacle polygon is self-intersecting");

  for (const MatchGroup& g : layout.groups) {
    const std::string where = "group " + std::to_string(g.id);
    if (g.target_length <= 0)
      throw std::runtime_error(where + ": target_length must be positive");
    for (int m : g.members) {
      const double len = member_length(layout, m);  // throws on unknown id
      if (len > g.target_length + 1e-6)
        throw std::runtime_error(where + ": member " + std::to_string(m) +
                                 " is longer than target_length");
    }
  }

  for (const auto& [id, polys] : layout.routable_areas) {
    const std::string where = "routable_areas " + std::to_string(id);
    if (!layout.find_trace(id) && !layout.find_pair(id))
      throw std::runtime_error(where + ": unknown trace or pair id");
    if (polys.empty()) throw std::runtime_error(where + ": empty polygon list");
  }
}

std::string layout_to_json(const Layout& layout) {
  json j;
  j["units"] = "nm";
  j["dras"] = json::array();
  for (const Dra& d : layout.dras) {
    json jd;
    jd["id"] = d.id;
    jd["polygon"] = polygon_to_json(d.region);
    jd["rules"] = {{"d_gap", d.rules.d_gap},
                   {"d_obs", d.rules.d_obs},
                   {"d_protect", d.rules.d_protect},
                   {"trace_width", d.rules.trace_width}};
    j["dras"].push_back(std::move(jd));
  }
  j["obstacles"] = json::array();
  for (const Polygon& o : layout.obstacles) j["obstacles"].push_back(polygon_to_json(o));
  j["traces"] = json::array();
  for (const Trace& t : layout.traces) {
    json jt;
    jt["id"] = t.id;
    jt["width"] = t.width;
    jt["nodes"] = json::array();
    for (const Point& p : t.nodes) jt["nodes"].push_back(point_to_json(p));
    j["traces"].push_back(std::move(jt));
  }
  j["pairs"] = json::array();
  for (const DifferentialPair& p : layout.pairs) {
    j["pairs"].push_back({{"id", p.id},
                          {"p", p.trace_p},
                          {"n", p.trace_n},
                          {"gap", p.gap},
                          {"breakout_p", p.breakout_p},
                          {"breakout_n", p.breakout_n}});
  }
  j["groups"] = json::array();
  for (const MatchGroup& g : layout.groups) {
    j["groups"].push_back({{"id", g.id},
                           {"members", g.members},
                           {"target_length", g.target_length},
                           {"tolerance", g.tolerance}});
  }
  if (!layout.routable_areas.empty()) {
    json ra = json::object();
    for (const auto& [id, polys] : layout.routable_areas) {
      json arr = json::array();
      for (const Polygon& p : polys) arr.push_back(polygon_to_json(p));
      ra[std::to_string(id)] = std::move(arr);
    }
    j["routable_areas"] = std::move(ra);
  }
  if (!layout.legacy.empty()) {
    json lg = json::array();
    for (const std::string& f : layout.legacy) lg.push_back(f);
    j["legacy"] = std::move(lg);
  }
  return j.dump(1) + "\n";
}

Layout layout_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("layout parse error: ") + e.what());
  }
  if (j.value("units", "") != std::string("nm"))
    throw std::runtime_error("layout: units must be \"nm\"");

  Layout layout;
  for (const json& jd : j.value("dras", json::array())) {
    Dra d{require_int(jd, "id", "dra"),
          polygon_from_json(jd.at("polygon"), "dra polygon"), {}};
    const std::string where = "dra " + std::to_string(d.id);
    if (!jd.contains("rules")) throw std::runtime_error(where + ": missing rules");
    const json& jr = jd["rules"];
    d.rules.d_gap = require_number(jr, "d_gap", where);
    d.rules.d_obs = require_number(jr, "d_obs", where);
    d.rules.d_protect = require_number(jr, "d_protect", where);
    d.rules.trace_width = require_number(jr, "trace_width", where);
    layout.dras.push_back(std::move(d));
  }
  for (const json& jo : j.value("obstacles", json::array()))
    layout.obstacles.push_back(polygon_from_json(jo, "obstacle"));
  for (const json& jt : j.value("traces", json::array())) {
    Trace t;
    t.id = require_int(jt, "id", "trace");
    const std::string where = "trace " + std::to_string(t.id);
    t.width = require_number(jt, "width", where);
    if (!jt.contains("nodes") || !jt["nodes"].is_array())
      throw std::runtime_error(where + ": missing nodes array");
    for (const json& jn : jt["nodes"])
      t.nodes.push_back(point_from_json(jn, where + " node"));
    layout.traces.push_back(std::move(t));
  }
  for (const json& jp : j.value("pairs", json::array())) {
    DifferentialPair p;
    p.id = require_int(jp, "id", "pair");
    const std::string where = "pair " + std::to_string(p.id);
    p.trace_p = require_int(jp, "p", where);
    p.trace_n = require_int(jp, "n", where);
    p.gap = require_number(jp, "gap", where);
    p.breakout_p = jp.value("breakout_p", 0);
    p.breakout_n = jp.value("breakout_n", 0);
    layout.pairs.push_back(p);
  }
  for (const json& jg : j.value("groups", json::array())) {
    MatchGroup g;
    g.id = require_int(jg, "id", "group");
    const std::string where = "group " + std::to_string(g.id);
    if (!jg.contains("members") || !jg["members"].is_array())
      throw std::runtime_error(where + ": missing members array");
    for (const json& m : jg["members"]) g.members.push_back(m.get<int>());
    g.target_length = require_number(jg, "target_length", where);
    g.tolerance = require_number(jg, "tolerance", where);
    layout.groups.push_back(std::move(g));
  }
  if (j.contains("routable_areas")) {
    for (const auto& [key, val] : j["routable_areas"].items()) {
      std::vector<Polygon> polys;
      for (const json& jp : val)
        polys.push_back(polygon_from_json(jp, "routable_areas " + key));
      layout.routable_areas.emplace(std::stoi(key), std::move(polys));
    }
  }
  for (const json& f : j.value("legacy", json::array()))
    layout.legacy.insert(f.get<std::string>());
  validate_layout(layout);
  return layout;
}

Layout load_layout(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open layout file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return layout_from_json(buf.str());
}

void save_layout(const Layout& layout, const std::string& path) {
  // Stage into a sibling temp file so a failed write never leaves a
  // partial layout behind.
  const std::string text = layout_to_json(layout);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write layout file: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot replace layout file: " + path);
  }
}

}  // namespace lm
