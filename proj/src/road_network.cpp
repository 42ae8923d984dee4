#include "crossway/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "crossway/errors.hpp"

namespace crossway {

namespace {

constexpr double kJunctionTol = 0.05;

struct PolylineHit {
    double s = 0.0;
    double d = 0.0;  // signed, positive left
    size_t segment = 0;
    Vec2 point;
};

PolylineHit project_to_polyline(const std::vector<Vec2>& pts,
                                const std::vector<double>& cum, const Vec2& p) {
    PolylineHit best;
    double best_dist2 = std::numeric_limits<double>::max();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 ab = pts[i + 1] - a;
        const double len2 = ab.squared_norm();
        if (len2 <= 0.0) continue;
        const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        const Vec2 q = a + ab * t;
        const double dist2 = (p - q).squared_norm();
        if (dist2 < best_dist2) {
            best_dist2 = dist2;
            best.segment = i;
            best.point = q;
            best.s = cum[i] + t * std::sqrt(len2);
            const double side = ab.cross(p - a);
            best.d = std::sqrt(dist2) * (side >= 0.0 ? 1.0 : -1.0);
        }
    }
    return best;
}

std::vector<double> cumulative_arclength(const std::vector<Vec2>& pts) {
    std::vector<double> cum(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) {
        cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    return cum;
}

bool endpoints_match(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                     bool reversed) {
    if (a.size() < 2 || b.size() < 2) return false;
    const Vec2& b0 = reversed ? b.back() : b.front();
    const Vec2& b1 = reversed ? b.front() : b.back();
    return (a.front() - b0).norm() <= kJunctionTol &&
           (a.back() - b1).norm() <= kJunctionTol;
}

// Lateral adjacency: two lanelets belong to the same road when one's
// boundary coincides with a boundary of the other (same or opposite
// direction).
bool laterally_adjacent(const Lanelet& a, const Lanelet& b) {
    return endpoints_match(a.left_boundary, b.left_boundary, true) ||
           endpoints_match(a.left_boundary, b.right_boundary, false) ||
           endpoints_match(a.right_boundary, b.left_boundary, false) ||
           endpoints_match(a.right_boundary, b.right_boundary, true);
}

}  // namespace

std::vector<Vec2> Lanelet::polygon() const {
    std::vector<Vec2> poly = left_boundary;
    poly.insert(poly.end(), right_boundary.rbegin(), right_boundary.rend());
    return poly;
}

LaneletNetwork::LaneletNetwork(std::vector<Lanelet> lanelets)
    : lanelets_(std::move(lanelets)) {
    for (size_t i = 0; i < lanelets_.size(); ++i) {
        index_[lanelets_[i].id] = i;
    }
    build_road_groups();
}

const Lanelet& LaneletNetwork::lanelet(int id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw UnknownLanelet(id);
    return lanelets_[it->second];
}

const std::vector<int>& LaneletNetwork::road_group(int id) const {
    const auto it = road_groups_.find(id);
    if (it == road_groups_.end()) throw UnknownLanelet(id);
    return it->second;
}

void LaneletNetwork::build_road_groups() {
    // Union-find over lateral adjacency.
    std::map<int, int> parent;
    for (const auto& l : lanelets_) parent[l.id] = l.id;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (size_t i = 0; i < lanelets_.size(); ++i) {
        for (size_t j = i + 1; j < lanelets_.size(); ++j) {
            if (laterally_adjacent(lanelets_[i], lanelets_[j])) {
                parent[find(lanelets_[i].id)] = find(lanelets_[j].id);
            }
        }
    }
    std::map<int, std::vector<int>> groups;
    for (const auto& l : lanelets_) groups[find(l.id)].push_back(l.id);
    for (const auto& l : lanelets_) road_groups_[l.id] = groups[find(l.id)];
}

int LaneletNetwork::lanelet_at(const Vec2& p) const {
    for (const auto& l : lanelets_) {
        if (point_in_polygon(p, l.polygon())) return l.id;
    }
    return -1;
}

void LaneletNetwork::validate() const {
    for (const auto& l : lanelets_) {
        if (l.centerline.size() < 2 || l.left_boundary.size() < 2 ||
            l.right_boundary.size() < 2) {
            throw InvalidConfig("lanelet " + std::to_string(l.id) +
                                " has degenerate polylines");
        }
        if (l.lane_width <= 0.0) {
            throw InvalidConfig("lanelet " + std::to_string(l.id) +
                                " has non-positive lane width");
        }
        for (int succ : l.successors) {
            const Lanelet& s = lanelet(succ);
            if ((l.centerline.back() - s.centerline.front()).norm() >
                kJunctionTol) {
                throw InvalidConfig(
                    "lanelet " + std::to_string(l.id) + " -> " +
                    std::to_string(succ) + " is not geometrically continuous");
            }
        }
    }
}

Vec2 ReferencePath::point_at(double s) const {
    if (points.empty()) return {};
    if (s <= 0.0) return points.front();
    if (s >= cum_arclength.back()) return points.back();
    const auto it =
        std::upper_bound(cum_arclength.begin(), cum_arclength.end(), s);
    const size_t i = static_cast<size_t>(it - cum_arclength.begin()) - 1;
    const double seg = cum_arclength[i + 1] - cum_arclength[i];
    const double t = (s - cum_arclength[i]) / seg;
    return points[i] + (points[i + 1] - points[i]) * t;
}

double ReferencePath::heading_at(double s) const {
    if (headings.empty()) return 0.0;
    if (s <= 0.0) return headings.front();
    if (s >= cum_arclength.back()) return headings.back();
    const auto it =
        std::upper_bound(cum_arclength.begin(), cum_arclength.end(), s);
    const size_t i = static_cast<size_t>(it - cum_arclength.begin()) - 1;
    return headings[i];
}

std::vector<int> plan_route(const LaneletNetwork& network, int start_id,
                            int goal_id) {
    const Lanelet& start = network.lanelet(start_id);
    const Lanelet& goal = network.lanelet(goal_id);
    const Vec2 goal_entry = goal.centerline.front();

    const auto heuristic = [&](const Lanelet& l) {
        if (l.id == goal_id) return 0.0;
        return (l.centerline.back() - goal_entry).norm();
    };

    struct Node {
        double f;
        double g;
        int id;
        bool operator>(const Node& o) const { return f > o.f; }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    std::map<int, double> best_g;
    std::map<int, int> came_from;

    const double g0 = start.arc_length();
    best_g[start_id] = g0;
    open.push({g0 + heuristic(start), g0, start_id});

    while (!open.empty()) {
        const Node cur = open.top();
        open.pop();
        if (cur.g > best_g[cur.id] + 1e-12) continue;
        if (cur.id == goal_id) {
            std::vector<int> route;
            for (int id = goal_id;; id = came_from[id]) {
                route.push_back(id);
                if (id == start_id) break;
            }
            std::reverse(route.begin(), route.end());
            return route;
        }
        for (int succ_id : network.lanelet(cur.id).successors) {
            const Lanelet& succ = network.lanelet(succ_id);
            const double g = cur.g + succ.arc_length();
            const auto it = best_g.find(succ_id);
            if (it == best_g.end() || g < it->second - 1e-12) {
                best_g[succ_id] = g;
                came_from[succ_id] = cur.id;
                open.push({g + heuristic(succ), g, succ_id});
            }
        }
    }
    throw NoRouteFound(start_id, goal_id);
}

ReferencePath build_reference_path(const LaneletNetwork& network,
                                   const std::vector<int>& route) {
    std::vector<Vec2> pts;
    for (int id : route) {
        for (const Vec2& p : network.lanelet(id).centerline) {
            if (!pts.empty() && (p - pts.back()).norm() <= kJunctionTol) continue;
            pts.push_back(p);
        }
    }
    ReferencePath path;
    path.points = std::move(pts);
    path.cum_arclength = cumulative_arclength(path.points);
    path.headings.resize(path.points.size(), 0.0);
    for (size_t i = 0; i + 1 < path.points.size(); ++i) {
        const Vec2 d = path.points[i + 1] - path.points[i];
        path.headings[i] = std::atan2(d.y, d.x);
    }
    if (path.points.size() >= 2) path.headings.back() = path.headings[path.points.size() - 2];
    return path;
}

ReferencePath plan_reference_path(const LaneletNetwork& network, int start_id,
                                  int goal_id) {
    return build_reference_path(network, plan_route(network, start_id, goal_id));
}

CurvilinearPose project(const ReferencePath& path, double x, double y,
                        double theta) {
    const PolylineHit hit =
        project_to_polyline(path.points, path.cum_arclength, {x, y});
    CurvilinearPose pose;
    pose.s = hit.s;
    pose.d = hit.d;
    pose.theta_err = wrap_angle(theta - path.headings[hit.segment]);
    return pose;
}

namespace {

struct ClosestPoint {
    double dist;
    Vec2 point;
};

ClosestPoint closest_on_polyline(const Vec2& p, const std::vector<Vec2>& pts) {
    ClosestPoint best{std::numeric_limits<double>::max(), {}};
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const Vec2 a = pts[i];
        const Vec2 ab = pts[i + 1] - a;
        const double len2 = ab.squared_norm();
        if (len2 <= 0.0) continue;
        const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        const Vec2 q = a + ab * t;
        const double d = (p - q).norm();
        if (d < best.dist) best = {d, q};
    }
    return best;
}

}  // namespace

BoundaryObservations boundary_observations(const LaneletNetwork& network,
                                           double x, double y) {
    const Vec2 p{x, y};
    const int id = network.lanelet_at(p);
    if (id < 0) throw OffRoad(x, y);
    const Lanelet& lane = network.lanelet(id);

    BoundaryObservations obs;
    obs.lanelet_id = id;

    // Curvature from the three centerline vertices around the nearest one.
    const auto& cl = lane.centerline;
    size_t nearest = 0;
    double nearest_d = std::numeric_limits<double>::max();
    for (size_t i = 0; i < cl.size(); ++i) {
        const double d = (cl[i] - p).squared_norm();
        if (d < nearest_d) {
            nearest_d = d;
            nearest = i;
        }
    }
    if (cl.size() >= 3) {
        const size_t mid = std::clamp<size_t>(nearest, 1, cl.size() - 2);
        obs.curvature = three_point_curvature(cl[mid - 1], cl[mid], cl[mid + 1]);
    }

    const auto cum = cumulative_arclength(cl);
    const PolylineHit hit = project_to_polyline(cl, cum, p);
    obs.center_offset = hit.d;
    obs.lane_left = point_polyline_distance(p, lane.left_boundary);
    obs.lane_right = point_polyline_distance(p, lane.right_boundary);

    // Outermost boundaries of the road group, classified by side relative
    // to the occupied lane's direction of travel.
    const Vec2 seg_dir = cl[hit.segment + 1] - cl[hit.segment];
    const Vec2 left_n = seg_dir.perp();
    double road_left = obs.lane_left;
    double road_right = obs.lane_right;
    for (int member_id : network.road_group(id)) {
        const Lanelet& member = network.lanelet(member_id);
        for (const auto* boundary : {&member.left_boundary, &member.right_boundary}) {
            const ClosestPoint cpt = closest_on_polyline(p, *boundary);
            if ((cpt.point - p).dot(left_n) >= 0.0) {
                road_left = std::max(road_left, cpt.dist);
            } else {
                road_right = std::max(road_right, cpt.dist);
            }
        }
    }
    obs.road_left = road_left;
    obs.road_right = road_right;
    return obs;
}

}  // namespace crossway
