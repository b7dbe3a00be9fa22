#include "mcsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace mcsim {

double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

const char* toString(LinkState s) { return s == LinkState::Los ? "LOS" : "NLOS"; }

Trajectory::Trajectory(std::vector<Point2> waypoints, double speedMps)
    : waypoints_(std::move(waypoints)), speed_(speedMps) {
  if (waypoints_.size() < 2) throw DomainError("trajectory needs at least two waypoints");
  if (!(speed_ > 0.0)) throw DomainError("trajectory speed must be > 0");
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    length_ += std::hypot(waypoints_[i].x - waypoints_[i - 1].x,
                          waypoints_[i].y - waypoints_[i - 1].y);
    cumulative_.push_back(length_);
  }
  if (!(length_ > 0.0)) throw DomainError("trajectory has zero length");
}

Point2 Trajectory::position(double t) const {
  const double total = duration();
  // tolerate rounding from integer-nanosecond clocks at the end of the path
  if (t < 0.0 || t > total * (1.0 + 1e-12) + 1e-9) {
    std::ostringstream msg;
    msg << "time " << t << " s outside trajectory span [0, " << total << "]";
    throw DomainError(msg.str());
  }
  const double s = std::min(t * speed_, length_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t seg = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  seg = std::clamp<std::size_t>(seg, 1, waypoints_.size() - 1);
  const Point2& a = waypoints_[seg - 1];
  const Point2& b = waypoints_[seg];
  const double segLen = cumulative_[seg] - cumulative_[seg - 1];
  const double f = segLen > 0.0 ? (s - cumulative_[seg - 1]) / segLen : 0.0;
  return Point2{a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
}

Point2 uePosition(const Trajectory& trajectory, double t) { return trajectory.position(t); }

std::vector<Building> generateBuildings(RandomStream& stream, int count, const Rect& bounds,
                                        Range sideM, Range heightM,
                                        const std::vector<Point2>& keepClear) {
  if (count < 0) throw DomainError("building count must be >= 0");
  if (!(sideM.lo > 0.0 && sideM.hi >= sideM.lo) || !(heightM.lo > 0.0 && heightM.hi >= heightM.lo))
    throw DomainError("building size and height ranges must be positive");
  std::vector<Building> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (attempts++ >= kBuildingAttemptBudget) {
      throw GenerationError("could not place " + std::to_string(count) +
                            " non-overlapping buildings after " +
                            std::to_string(kBuildingAttemptBudget) + " attempts");
    }
    const double w = stream.uniform(sideM.lo, sideM.hi);
    const double d = stream.uniform(sideM.lo, sideM.hi);
    const double h = stream.uniform(heightM.lo, heightM.hi);
    if (w > bounds.width() || d > bounds.height()) continue;
    const double x = stream.uniform(bounds.xmin, bounds.xmax - w);
    const double y = stream.uniform(bounds.ymin, bounds.ymax - d);
    Building b{Rect{x, y, x + w, y + d}, h};
    bool ok = std::none_of(out.begin(), out.end(),
                           [&](const Building& o) { return o.footprint.overlaps(b.footprint); });
    ok = ok && std::none_of(keepClear.begin(), keepClear.end(),
                            [&](const Point2& p) { return b.footprint.contains(p); });
    if (ok) out.push_back(b);
  }
  return out;
}

namespace {

// Liang-Barsky clip of segment a->b (2-D) against a rectangle.
bool clipSegment(const Point3& a, const Point3& b, const Rect& r, double& t0, double& t1) {
  t0 = 0.0;
  t1 = 1.0;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - r.xmin, r.xmax - a.x, a.y - r.ymin, r.ymax - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    } else {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    }
  }
  return t0 <= t1;
}

}  // namespace

LinkState linkState(const Point3& a, const Point3& b, const std::vector<Building>& buildings) {
  for (const auto& bld : buildings) {
    double t0 = 0.0;
    double t1 = 0.0;
    if (!clipSegment(a, b, bld.footprint, t0, t1)) continue;
    // segment height is linear in t, so its minimum over [t0, t1] is at an end
    const double z0 = a.z + t0 * (b.z - a.z);
    const double z1 = a.z + t1 * (b.z - a.z);
    if (std::min(z0, z1) < bld.height) return LinkState::Nlos;
  }
  return LinkState::Los;
}

SitePlan defaultSitePlan() {
  SitePlan plan;
  plan.mmwave = {Site{2, {0.0, 50.0, 10.0}}, Site{3, {200.0, 50.0, 10.0}},
                 Site{4, {100.0, 110.0, 10.0}}};
  plan.lte = Site{1, {100.0, 110.0, 10.0}};
  plan.lteColocatedWith = 4;
  return plan;
}

Trajectory defaultTrajectory(double speedMps) {
  return Trajectory({{50.0, -5.0}, {150.0, -5.0}}, speedMps);
}

Scenario defaultScenario(RandomStream& buildingStream, double speedMps) {
  Scenario s;
  s.geometry.bounds = Rect{0.0, 0.0, 200.0, 115.0};
  s.geometry.sites = defaultSitePlan();
  std::vector<Point2> clear;
  for (const auto& site : s.geometry.sites.mmwave)
    clear.push_back({site.position.x, site.position.y});
  s.geometry.buildings = generateBuildings(buildingStream, 4, s.geometry.bounds, Range{20.0, 60.0},
                                           Range{5.0, 40.0}, clear);
  s.trajectory = defaultTrajectory(speedMps);
  return s;
}

Scenario cornerScenario(double speedMps) {
  Scenario s;
  s.geometry.bounds = Rect{-10.0, -30.0, 210.0, 130.0};
  // two blocks separated by a 4 m north-south street starting at x = 100
  s.geometry.buildings = {Building{Rect{0.0, 0.0, 98.0, 110.0}, 25.0},
                          Building{Rect{102.0, 0.0, 200.0, 110.0}, 25.0}};
  s.geometry.sites.mmwave = {Site{2, {0.0, -20.0, 10.0}}, Site{3, {200.0, -20.0, 10.0}},
                             Site{4, {100.0, 120.0, 10.0}}};
  s.geometry.sites.lte = Site{1, {100.0, 120.0, 10.0}};
  s.geometry.sites.lteColocatedWith = 4;
  s.trajectory = Trajectory({{50.0, -5.0}, {100.0, -5.0}, {100.0, 50.0}}, speedMps);
  return s;
}

void writeGeometry(std::ostream& out, const Scenario& scenario) {
  const auto& g = scenario.geometry;
  out.precision(17);
  out << "mcsim-geometry v1\n";
  out << "bounds " << g.bounds.xmin << ' ' << g.bounds.ymin << ' ' << g.bounds.xmax << ' '
      << g.bounds.ymax << '\n';
  for (const auto& b : g.buildings) {
    out << "building " << b.footprint.xmin << ' ' << b.footprint.ymin << ' ' << b.footprint.xmax
        << ' ' << b.footprint.ymax << ' ' << b.height << '\n';
  }
  for (const auto& s : g.sites.mmwave) {
    out << "mmwave " << s.id << ' ' << s.position.x << ' ' << s.position.y << ' ' << s.position.z
        << '\n';
  }
  out << "lte " << g.sites.lte.id << ' ' << g.sites.lte.position.x << ' '
      << g.sites.lte.position.y << ' ' << g.sites.lte.position.z;
  if (g.sites.lteColocatedWith) out << ' ' << *g.sites.lteColocatedWith;
  out << '\n';
  out << "trajectory " << scenario.trajectory.speed();
  for (const auto& p : scenario.trajectory.waypoints()) out << ' ' << p.x << ' ' << p.y;
  out << '\n';
}

Scenario readGeometry(std::istream& in) {
  Scenario s;
  std::string line;
  int lineNo = 0;
  bool header = false;
  bool haveBounds = false;
  bool haveLte = false;
  bool haveTrajectory = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (!header) {
      std::string version;
      ls >> version;
      if (tag != "mcsim-geometry" || version != "v1")
        throw ParseError("expected header 'mcsim-geometry v1'", lineNo);
      header = true;
      continue;
    }
    auto fail = [&](const std::string& what) { throw ParseError(what, lineNo); };
    if (tag == "bounds") {
      auto& b = s.geometry.bounds;
      if (!(ls >> b.xmin >> b.ymin >> b.xmax >> b.ymax)) fail("malformed bounds record");
      haveBounds = true;
    } else if (tag == "building") {
      Building b;
      if (!(ls >> b.footprint.xmin >> b.footprint.ymin >> b.footprint.xmax >> b.footprint.ymax >>
            b.height))
        fail("malformed building record");
      s.geometry.buildings.push_back(b);
    } else if (tag == "mmwave") {
      Site site;
      if (!(ls >> site.id >> site.position.x >> site.position.y >> site.position.z))
        fail("malformed mmwave record");
      s.geometry.sites.mmwave.push_back(site);
    } else if (tag == "lte") {
      Site& site = s.geometry.sites.lte;
      if (!(ls >> site.id >> site.position.x >> site.position.y >> site.position.z))
        fail("malformed lte record");
      int co = 0;
      if (ls >> co) s.geometry.sites.lteColocatedWith = co;
      haveLte = true;
    } else if (tag == "trajectory") {
      double speed = 0.0;
      if (!(ls >> speed)) fail("malformed trajectory record");
      std::vector<Point2> pts;
      Point2 p;
      while (ls >> p.x >> p.y) pts.push_back(p);
      try {
        s.trajectory = Trajectory(std::move(pts), speed);
      } catch (const DomainError& e) {
        fail(e.what());
      }
      haveTrajectory = true;
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!header) throw ParseError("empty geometry file", 0);
  if (!haveBounds || !haveLte || !haveTrajectory || s.geometry.sites.mmwave.empty())
    throw ParseError("geometry file lacks bounds, lte, mmwave or trajectory records", lineNo);
  return s;
}

}  // namespace mcsim
