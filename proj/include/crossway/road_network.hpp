#pragma once

#include <map>
#include <vector>

#include "crossway/geometry.hpp"

namespace crossway {

// Atomic drivable lane segment. Directed: traffic flows from the first
// centerline point towards the last.
struct Lanelet {
    int id = 0;
    std::vector<Vec2> centerline;
    std::vector<Vec2> left_boundary;
    std::vector<Vec2> right_boundary;
    std::vector<int> successors;
    double lane_width = 0.0;

    double arc_length() const { return polyline_length(centerline); }
    std::vector<Vec2> polygon() const;  // left boundary + reversed right
};

class LaneletNetwork {
  public:
    LaneletNetwork() = default;
    explicit LaneletNetwork(std::vector<Lanelet> lanelets);

    const std::vector<Lanelet>& lanelets() const { return lanelets_; }
    const Lanelet& lanelet(int id) const;
    bool has_lanelet(int id) const { return index_.count(id) > 0; }

    // Lanelets belonging to the same road as `id` (laterally adjacent
    // groups derived from shared boundary polylines), including `id`.
    const std::vector<int>& road_group(int id) const;

    // Id of a lanelet whose polygon contains the point, or -1.
    int lanelet_at(const Vec2& p) const;

    // Checks successor references and geometric continuity (0.05 m).
    void validate() const;

  private:
    std::vector<Lanelet> lanelets_;
    std::map<int, size_t> index_;
    std::map<int, std::vector<int>> road_groups_;

    void build_road_groups();
};

struct ReferencePath {
    std::vector<Vec2> points;
    std::vector<double> headings;        // per-point tangent, last repeats
    std::vector<double> cum_arclength;   // strictly increasing, starts at 0

    double total_length() const {
        return cum_arclength.empty() ? 0.0 : cum_arclength.back();
    }
    Vec2 point_at(double s) const;
    double heading_at(double s) const;
};

struct CurvilinearPose {
    double s = 0.0;          // arc length along the path
    double d = 0.0;          // signed lateral offset, positive left
    double theta_err = 0.0;  // heading error vs path tangent, (-pi, pi]
};

struct BoundaryObservations {
    double curvature = 0.0;      // c
    double center_offset = 0.0;  // l_o, positive left
    double road_left = 0.0;      // r_l
    double road_right = 0.0;     // r_r
    double lane_left = 0.0;      // l_l
    double lane_right = 0.0;     // l_r
    int lanelet_id = -1;
};

// A* over the lanelet graph; cost = centerline arc length, heuristic =
// Euclidean distance from lanelet end to goal lanelet start. Throws
// UnknownLanelet / NoRouteFound.
std::vector<int> plan_route(const LaneletNetwork& network, int start_id,
                            int goal_id);

// Concatenates route centerlines into a path, merging duplicate junction
// points (0.05 m tolerance).
ReferencePath build_reference_path(const LaneletNetwork& network,
                                   const std::vector<int>& route);

ReferencePath plan_reference_path(const LaneletNetwork& network, int start_id,
                                  int goal_id);

// Orthogonal projection onto the path polyline, global minimum over
// segments, ties broken by lowest segment index.
CurvilinearPose project(const ReferencePath& path, double x, double y,
                        double theta);

// Lane observations for the lanelet occupied by (x, y). Throws OffRoad.
BoundaryObservations boundary_observations(const LaneletNetwork& network,
                                           double x, double y);

}  // namespace crossway
