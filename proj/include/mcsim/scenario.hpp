// Urban-grid geometry: buildings, eNB sites, UE trajectory and geometric
// LOS/NLOS classification.

#ifndef MCSIM_SCENARIO_HPP
#define MCSIM_SCENARIO_HPP

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcsim/engine.hpp"

namespace mcsim {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Point3& a, const Point3& b);

struct Rect {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  bool contains(const Rect& r) const {
    return r.xmin >= xmin && r.xmax <= xmax && r.ymin >= ymin && r.ymax <= ymax;
  }
  bool contains(const Point2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  /// True when the interiors intersect; shared edges do not count.
  bool overlaps(const Rect& r) const {
    return xmin < r.xmax && r.xmin < xmax && ymin < r.ymax && r.ymin < ymax;
  }
};

struct Building {
  Rect footprint;
  double height = 0.0;
};

struct Site {
  int id = 0;
  Point3 position;
};

/// mmWave small cells plus the LTE macro (which hosts the coordinator).
struct SitePlan {
  std::vector<Site> mmwave;
  Site lte;
  std::optional<int> lteColocatedWith;
};

/// Piecewise-linear path traversed at constant speed.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Point2> waypoints, double speedMps);

  const std::vector<Point2>& waypoints() const { return waypoints_; }
  double speed() const { return speed_; }
  double length() const { return length_; }
  double duration() const { return length_ / speed_; }

  /// Position at time t in [0, duration()]; throws DomainError otherwise.
  Point2 position(double t) const;

 private:
  std::vector<Point2> waypoints_;
  std::vector<double> cumulative_;
  double speed_ = 1.0;
  double length_ = 0.0;
};

enum class LinkState { Los, Nlos };

const char* toString(LinkState s);

struct ScenarioGeometry {
  Rect bounds;
  std::vector<Building> buildings;
  SitePlan sites;
};

struct Scenario {
  ScenarioGeometry geometry;
  Trajectory trajectory;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

constexpr int kBuildingAttemptBudget = 10000;

/// Rejection-samples `count` pairwise non-overlapping buildings inside
/// `bounds`. Footprints never contain a point of `keepClear`.
std::vector<Building> generateBuildings(RandomStream& stream, int count, const Rect& bounds,
                                        Range sideM, Range heightM,
                                        const std::vector<Point2>& keepClear = {});

Point2 uePosition(const Trajectory& trajectory, double t);

/// NLOS iff the 3-D segment crosses a building footprint below its roof.
LinkState linkState(const Point3& a, const Point3& b, const std::vector<Building>& buildings);

SitePlan defaultSitePlan();
Trajectory defaultTrajectory(double speedMps);

/// Random four-building urban grid with the reference site plan and path.
Scenario defaultScenario(RandomStream& buildingStream, double speedMps);

/// Fixed T-junction layout: straight along a street, then a left turn that
/// hides both bottom eNBs and exposes the top one.
Scenario cornerScenario(double speedMps);

void writeGeometry(std::ostream& out, const Scenario& scenario);
Scenario readGeometry(std::istream& in);

}  // namespace mcsim

#endif  // MCSIM_SCENARIO_HPP
