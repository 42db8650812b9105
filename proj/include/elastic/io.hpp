#pragma once

// Curve JSON, energy CSV, event JSON, flow config parsing and SVG output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "discrete_curve.hpp"
#include "flow.hpp"

namespace elastic::io {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest representation that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

template <std::size_t N>
json curve_to_json(const DiscreteCurve<N>& c, const json& metadata = json::object()) {
  json pts = json::array();
  for (const auto& p : c.points) {
    json q = json::array();
    for (std::size_t k = 0; k < N; ++k) q.push_back(p[k]);
    pts.push_back(std::move(q));
  }
  return json{{"dimension", N}, {"closed", c.closed}, {"points", std::move(pts)}, {"metadata", metadata}};
}

inline std::size_t curve_dimension(const json& j) {
  if (!j.is_object() || !j.contains("dimension")) throw ParseError("curve json: missing dimension");
  const auto d = j.at("dimension").get<std::size_t>();
  if (d != 2 && d != 3) throw ParseError("curve json: dimension must be 2 or 3");
  return d;
}

template <std::size_t N>
DiscreteCurve<N> curve_from_json(const json& j, json* metadata = nullptr) {
  try {
    if (curve_dimension(j) != N) throw ParseError("curve json: dimension mismatch");
    DiscreteCurve<N> c;
    c.closed = j.value("closed", true);
    for (const auto& q : j.at("points")) {
      if (!q.is_array() || q.size() != N) throw ParseError("curve json: point of wrong size");
      Vec<N> p;
      for (std::size_t k = 0; k < N; ++k) p[k] = q[k].get<double>();
      c.points.push_back(p);
    }
    if (metadata) *metadata = j.value("metadata", json::object());
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("curve json: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

template <std::size_t N>
void write_curve(const std::string& path, const DiscreteCurve<N>& c, const json& metadata = json::object()) {
  write_json_file(path, curve_to_json(c, metadata));
}

// ---- flow output ----

inline std::string energy_csv(const std::vector<EnergySample>& h) {
  std::ostringstream os;
  os << "t,L,B,Bbar,E_lambda,lambda,min_self_distance\n";
  for (const auto& e : h) {
    os << format_double(e.t) << ',' << format_double(e.L) << ',' << format_double(e.B) << ','
       << format_double(e.Bbar) << ',' << format_double(e.E_lambda) << ',' << format_double(e.lambda) << ',';
    if (!std::isnan(e.min_self_distance)) os << format_double(e.min_self_distance);
    os << '\n';
  }
  return os.str();
}

inline json events_to_json(const std::vector<FlowEvent>& events) {
  json a = json::array();
  for (const auto& e : events) {
    json j{{"t", e.t}, {"step", e.step}, {"kind", to_string(e.kind)}, {"intersections", e.intersections}};
    if (!e.detail.empty()) j["detail"] = e.detail;
    a.push_back(std::move(j));
  }
  return a;
}

template <std::size_t N>
json flow_config_to_json(const FlowConfig<N>& c) {
  json j{{"mode", to_string(c.mode)},
         {"lambda", c.lambda},
         {"dt_initial", c.dt_initial},
         {"dt_safety", c.dt_safety},
         {"dt_growth", c.dt_growth},
         {"t_max", c.t_max},
         {"max_steps", c.max_steps},
         {"resample_every", c.resample_every},
         {"n_points", c.n_points},
         {"prox_tol", c.intersection.prox_tol ? json(*c.intersection.prox_tol) : json("default")},
         {"angle_tol", c.intersection.angle_tol},
         {"check_intersections", c.check_intersections},
         {"stop_on_intersection", c.stop_on_intersection},
         {"symmetry", c.symmetry ? "reflection" : "none"},
         {"convergence_tol", c.convergence_tol},
         {"convergence_window", c.convergence_window},
         {"energy_slack", c.energy_slack},
         {"move_limit", c.move_limit},
         {"distance_every", c.distance_every}};
  if (!std::isinf(c.dt_max)) j["dt_max"] = c.dt_max;
  return j;
}

// Flat config: a JSON object, or "key = value" lines (# comments).
inline json parse_flat_config(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      auto j = json::parse(text);
      for (const auto& [k, v] : j.items())
        if (v.is_structured()) throw ParseError("config: value of '" + k + "' is not flat");
      return j;
    } catch (const json::exception& e) {
      throw ParseError(std::string("config: ") + e.what());
    }
  }
  json j = json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find_first_of("=:");
    if (eq == std::string::npos) throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError("config line " + std::to_string(lineno) + ": empty key");
    try {
      j[key] = json::parse(val);
    } catch (const json::exception&) {
      j[key] = val;  // bare word
    }
  }
  return j;
}

template <std::size_t N>
FlowConfig<N> flow_config_from_json(const json& j, FlowConfig<N> c = {}) {
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "mode") {
        const auto m = v.template get<std::string>();
        if (m == "fixed") c.mode = LambdaMode::fixed;
        else if (m == "length_preserving") c.mode = LambdaMode::length_preserving;
        else throw ParseError("config: unknown mode '" + m + "'");
      } else if (k == "lambda") c.lambda = v.template get<double>();
      else if (k == "dt_initial") c.dt_initial = v.template get<double>();
      else if (k == "dt_safety") c.dt_safety = v.template get<double>();
      else if (k == "dt_growth") c.dt_growth = v.template get<double>();
      else if (k == "dt_max") c.dt_max = v.template get<double>();
      else if (k == "t_max") c.t_max = v.template get<double>();
      else if (k == "max_steps") c.max_steps = v.template get<std::size_t>();
      else if (k == "resample_every") c.resample_every = v.template get<std::size_t>();
      else if (k == "n_points") c.n_points = v.template get<std::size_t>();
      else if (k == "prox_tol") {
        if (v.is_string() && v.template get<std::string>() == "default") c.intersection.prox_tol.reset();
        else c.intersection.prox_tol = v.template get<double>();
      } else if (k == "angle_tol") c.intersection.angle_tol = v.template get<double>();
      else if (k == "check_intersections") c.check_intersections = v.template get<bool>();
      else if (k == "stop_on_intersection") c.stop_on_intersection = v.template get<bool>();
      else if (k == "convergence_tol") c.convergence_tol = v.template get<double>();
      else if (k == "convergence_window") c.convergence_window = v.template get<std::size_t>();
      else if (k == "energy_slack") c.energy_slack = v.template get<double>();
      else if (k == "move_limit") c.move_limit = v.template get<double>();
      else if (k == "distance_every") c.distance_every = v.template get<std::size_t>();
      else if (k == "symmetry") {
        const auto s = v.template get<std::string>();
        if (s == "none") c.symmetry.reset();
        else if (s == "reflection") {
          Mat<N> R = identity<N>();
          R[1][1] = -1;
          c.symmetry = Symmetry<N>{RigidMotion<N>(R, Vec<N>{}), 0.5};
        } else throw ParseError("config: unknown symmetry '" + s + "'");
      } else if (k == "snapshot_every") {
        // handled by the caller
      } else {
        throw ParseError("config: unknown key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- SVG ----

struct SvgStyle {
  double width = 640;
  double margin = 0.05;  // fraction of the larger extent
  double stroke = 1.5;   // pixels
};

struct SvgPath {
  std::vector<Vec2> points;
  bool closed = true;
  std::string color = "#000000";
};

inline std::string svg(const std::vector<SvgPath>& paths, const std::vector<Vec2>& markers = {},
                       const SvgStyle& st = {}) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin, xmax = -xmin, ymax = -xmin;
  auto grow = [&](const Vec2& p) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  };
  for (const auto& path : paths)
    for (const auto& p : path.points) grow(p);
  for (const auto& p : markers) grow(p);
  if (!(xmax >= xmin)) xmin = ymin = 0, xmax = ymax = 1;
  const double ext = std::max({xmax - xmin, ymax - ymin, 1e-300});
  const double pad = st.margin * ext;
  const double scale = st.width / (ext + 2 * pad);
  const double w = (xmax - xmin + 2 * pad) * scale, h = (ymax - ymin + 2 * pad) * scale;
  // y flipped: svg y grows downward
  auto X = [&](double x) { return (x - xmin + pad) * scale; };
  auto Y = [&](double y) { return (ymax - y + pad) * scale; };
  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w << ' ' << h << "\" width=\"" << w
     << "\" height=\"" << h << "\">\n";
  for (const auto& path : paths) {
    os << (path.closed ? "<polygon" : "<polyline") << " fill=\"none\" stroke=\"" << path.color
       << "\" stroke-width=\"" << st.stroke << "\" stroke-linejoin=\"round\" points=\"";
    for (std::size_t i = 0; i < path.points.size(); ++i)
      os << (i ? " " : "") << X(path.points[i][0]) << ',' << Y(path.points[i][1]);
    os << "\"/>\n";
  }
  for (const auto& p : markers)
    os << "<circle cx=\"" << X(p[0]) << "\" cy=\"" << Y(p[1]) << "\" r=\"" << 2.5 * st.stroke
       << "\" fill=\"#c0392b\"/>\n";
  os << "</svg>\n";
  return os.str();
}

// Projection onto the first two coordinates.
template <std::size_t N>
SvgPath svg_path(const DiscreteCurve<N>& c, std::string color = "#000000") {
  SvgPath p;
  p.closed = c.closed;
  p.color = std::move(color);
  for (const auto& q : c.points) p.points.push_back(Vec2{q[0], q[1]});
  return p;
}

template <std::size_t N>
std::string svg(const DiscreteCurve<N>& c, const std::vector<Vec2>& markers = {}, const SvgStyle& st = {}) {
  return svg(std::vector<SvgPath>{svg_path(c)}, markers, st);
}

}  // namespace elastic::io
