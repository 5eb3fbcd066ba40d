#include "manet/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace manet {

namespace {

double round_micro(double v) { return std::round(v * 1e6) / 1e6; }

SimTime ceil_to_micro(double seconds) {
  const double us = std::ceil(seconds * 1e6 - 1e-6);
  return microseconds(static_cast<std::int64_t>(us));
}

void derive_legs(NodeTrack& track) {
  Position cur = track.initial;
  for (Leg& leg : track.legs) {
    leg.from = cur;
    const double d = distance(leg.from, leg.to);
    leg.arrive_s = leg.speed > 0.0 ? leg.depart.seconds() + d / leg.speed : INFINITY;
    if (d == 0.0) leg.arrive_s = leg.depart.seconds();
    cur = leg.to;
  }
}

}  // namespace

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

MobilityPlan generate_plan(const MobilityParams& p, RandomStream& stream) {
  if (p.nodes < 1) throw std::invalid_argument("mobility: node count must be >= 1");
  if (p.speed_min < 0.0) throw std::invalid_argument("mobility: speed_min must be >= 0");
  if (p.speed_min > p.speed_max) throw std::invalid_argument("mobility: speed_min must not exceed speed_max");
  if (p.pause_s < 0.0) throw std::invalid_argument("mobility: pause must be >= 0");
  if (!(p.area.width > 0.0 && p.area.height > 0.0)) throw std::invalid_argument("mobility: area must be positive");
  if (!(p.duration_s > 0.0)) throw std::invalid_argument("mobility: duration must be positive");

  MobilityPlan plan;
  plan.area = p.area;
  plan.duration_s = p.duration_s;
  plan.nodes.resize(static_cast<std::size_t>(p.nodes));

  auto draw_point = [&] {
    Position pos;
    pos.x = round_micro(stream.uniform(0.0, p.area.width));
    pos.y = round_micro(stream.uniform(0.0, p.area.height));
    return pos;
  };
  auto draw_speed = [&] {
    if (p.speed_min == p.speed_max) return p.speed_min;
    return std::clamp(round_micro(stream.uniform(p.speed_min, p.speed_max)), p.speed_min, p.speed_max);
  };

  const SimTime end = SimTime::from_seconds(p.duration_s);
  for (NodeTrack& track : plan.nodes) {
    track.initial = draw_point();
    if (p.speed_max <= 0.0) continue;
    Position cur = track.initial;
    SimTime t = ceil_to_micro(p.pause_s);
    while (t < end) {
      Leg leg;
      leg.depart = t;
      leg.to = draw_point();
      leg.speed = draw_speed();
      if (leg.speed <= 0.0) break;  // setdest's zero-speed trap: the node parks forever
      const double arrive = t.seconds() + distance(cur, leg.to) / leg.speed;
      track.legs.push_back(leg);
      cur = leg.to;
      t = ceil_to_micro(arrive + p.pause_s);
      if (p.pause_s == 0.0 && arrive == leg.depart.seconds()) t = t + microseconds(1);
    }
    derive_legs(track);
  }
  return plan;
}

Position position_at(const MobilityPlan& plan, NodeId node, SimTime t) {
  if (node < 0 || node >= plan.node_count()) throw std::out_of_range("mobility: unknown node id " + std::to_string(node));
  const NodeTrack& track = plan.nodes[static_cast<std::size_t>(node)];
  auto it = std::upper_bound(track.legs.begin(), track.legs.end(), t,
                             [](SimTime v, const Leg& leg) { return v < leg.depart; });
  if (it == track.legs.begin()) return track.initial;
  const Leg& leg = *std::prev(it);
  const double ts = t.seconds();
  if (ts >= leg.arrive_s) return leg.to;
  const double d = distance(leg.from, leg.to);
  const double frac = std::clamp((ts - leg.depart.seconds()) * leg.speed / d, 0.0, 1.0);
  Position pos{leg.from.x + (leg.to.x - leg.from.x) * frac, leg.from.y + (leg.to.y - leg.from.y) * frac};
  pos.x = std::clamp(pos.x, 0.0, plan.area.width);
  pos.y = std::clamp(pos.y, 0.0, plan.area.height);
  return pos;
}

MobilityPlan static_plan(Area area, double duration_s, const std::vector<Position>& positions) {
  MobilityPlan plan;
  plan.area = area;
  plan.duration_s = duration_s;
  for (Position p : positions) plan.nodes.push_back(NodeTrack{p, {}});
  return plan;
}

void write_movement_file(std::ostream& out, const MobilityPlan& plan) {
  char buf[160];
  for (int id = 0; id < plan.node_count(); ++id) {
    const NodeTrack& track = plan.nodes[static_cast<std::size_t>(id)];
    std::snprintf(buf, sizeof buf, "node %d init %.6f %.6f\n", id, track.initial.x, track.initial.y);
    out << buf;
    for (const Leg& leg : track.legs) {
      const std::int64_t us = leg.depart.ns() / 1000;
      std::snprintf(buf, sizeof buf, "node %d at %lld.%06lld goto %.6f %.6f speed %.6f\n", id,
                    static_cast<long long>(us / 1000000), static_cast<long long>(us % 1000000), leg.to.x, leg.to.y,
                    leg.speed);
      out << buf;
    }
  }
}

MobilityPlan read_movement_file(std::istream& in, Area area, double duration_s) {
  MobilityPlan plan;
  plan.area = area;
  plan.duration_s = duration_s;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw std::runtime_error("movement file line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string kw, verb;
    int id = -1;
    if (!(ss >> kw >> id >> verb) || kw != "node" || id < 0) fail("expected 'node <id> ...'");
    if (verb == "init") {
      if (id != plan.node_count()) fail("init lines must be ordered by node id");
      Position p;
      if (!(ss >> p.x >> p.y)) fail("bad init coordinates");
      plan.nodes.push_back(NodeTrack{p, {}});
    } else if (verb == "at") {
      if (id + 1 != plan.node_count()) fail("movement for a node without a preceding init line");
      double t = 0;
      std::string go, sp;
      Leg leg;
      if (!(ss >> t >> go >> leg.to.x >> leg.to.y >> sp >> leg.speed) || go != "goto" || sp != "speed") {
        fail("expected 'at <t> goto <x> <y> speed <v>'");
      }
      leg.depart = SimTime::from_seconds(t);
      auto& legs = plan.nodes.back().legs;
      if (!legs.empty() && leg.depart < legs.back().depart) fail("movements must be ordered by time");
      legs.push_back(leg);
    } else {
      fail("unknown directive '" + verb + "'");
    }
  }
  for (NodeTrack& track : plan.nodes) derive_legs(track);
  return plan;
}

}  // namespace manet
