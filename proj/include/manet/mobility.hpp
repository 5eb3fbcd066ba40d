#pragma once

#include <iosfwd>
#include <vector>

#include "manet/engine.hpp"
#include "manet/random.hpp"

namespace manet {

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

double distance(Position a, Position b);

struct Area {
  double width = 500.0;
  double height = 500.0;
};

/// One random-waypoint movement: leave the previous waypoint at `depart`
/// and travel in a straight line to `to` at constant `speed`.
struct Leg {
  SimTime depart;
  Position to;
  double speed = 0.0;  // m/s
  // Derived from the previous waypoint; not serialized.
  Position from;
  double arrive_s = 0.0;
};

struct NodeTrack {
  Position initial;
  std::vector<Leg> legs;
};

struct MobilityParams {
  int nodes = 0;
  Area area;
  double pause_s = 0.0;
  double speed_min = 1.0;
  double speed_max = 0.0;
  double duration_s = 150.0;
};

/// Fully materialized movement of every node. Immutable once built.
struct MobilityPlan {
  Area area;
  double duration_s = 0.0;
  std::vector<NodeTrack> nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }
};

/// Random waypoint with setdest semantics: each node starts at a uniform
/// position, rests `pause_s`, then repeatedly moves to a uniform waypoint at
/// a speed uniform in [speed_min, speed_max] and rests `pause_s` again.
/// Coordinates and speeds are rounded to 1e-6 and departures to whole
/// microseconds, so a plan survives a movement-file round trip unchanged.
/// A zero speed means the node never moves.
/// Throws std::invalid_argument on invalid ranges.
MobilityPlan generate_plan(const MobilityParams& params, RandomStream& stream);

/// Exact position by linear interpolation along the active leg.
/// Throws std::out_of_range for an unknown node.
Position position_at(const MobilityPlan& plan, NodeId node, SimTime t);

/// Plan where nodes never move (used for static topologies in tests).
MobilityPlan static_plan(Area area, double duration_s, const std::vector<Position>& positions);

/// Movement file:
///   node <id> init <x> <y>
///   node <id> at <t> goto <x> <y> speed <v>
/// Floats use 6 decimals; lines ordered by (node id, time).
void write_movement_file(std::ostream& out, const MobilityPlan& plan);
/// Throws std::runtime_error with the offending line number on malformed input.
MobilityPlan read_movement_file(std::istream& in, Area area, double duration_s);

}  // namespace manet
