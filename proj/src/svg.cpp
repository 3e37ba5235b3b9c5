#include "dqrb/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

namespace dqrb {

namespace {

constexpr double kPanelW = 380.0;
constexpr double kPanelH = 240.0;
constexpr double kGap = 18.0;
constexpr double kHeader = 30.0;
constexpr double kPadL = 52.0;  // room for y tick labels
constexpr double kPadR = 10.0;
constexpr double kPadT = 40.0;  // title + legend row
constexpr double kPadB = 26.0;

// Pixel coordinates rounded to 0.01 so output is compact and deterministic.
std::string px(double v) { return format_double(std::round(v * 100.0) / 100.0); }

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

// Padded y range over every finite sample; flat or empty data gets a unit
// band so the scale never degenerates.
Range fit_range(const std::vector<Series>& series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Series& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!(lo <= hi)) return {0.0, 1.0};
  double span = hi - lo;
  if (span < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    lo -= 0.05 * span;
    hi += 0.05 * span;
  }
  return {lo, hi};
}

void append_text(std::string& out, double x, double y, const std::string& anchor,
                 const std::string& fill, int size, const std::string& text) {
  out += "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" font-family=\"monospace\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\" fill=\"" + fill + "\">" +
         text + "</text>\n";
}

void append_polyline(std::string& out, const std::string& points, const std::string& color,
                     bool dashed) {
  out += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.3\"";
  if (dashed) out += " stroke-dasharray=\"6 3\"";
  out += " points=\"" + points + "\"/>\n";
}

void append_panel(std::string& out, const Panel& panel, double ox, double oy) {
  const double x0 = ox + kPadL;
  const double y0 = oy + kPadT;
  const double w = kPanelW - kPadL - kPadR;
  const double h = kPanelH - kPadT - kPadB;
  std::size_t n_max = 1;
  for (const Series& s : panel.series) n_max = std::max(n_max, s.y.size());
  const Range r = fit_range(panel.series);
  const double x_den = static_cast<double>(n_max > 1 ? n_max - 1 : 1);

  out += "<rect x=\"" + px(x0) + "\" y=\"" + px(y0) + "\" width=\"" + px(w) + "\" height=\"" +
         px(h) + "\" fill=\"white\" stroke=\"#888\"/>\n";
  append_text(out, ox + 6.0, oy + 16.0, "start", "#222", 13, panel.title);
  append_text(out, x0 - 4.0, y0 + 10.0, "end", "#555", 10, format_double(r.hi));
  append_text(out, x0 - 4.0, y0 + h, "end", "#555", 10, format_double(r.lo));
  append_text(out, x0, y0 + h + 14.0, "start", "#555", 10, "0");
  append_text(out, x0 + w, y0 + h + 14.0, "end", "#555", 10,
              std::to_string(n_max > 1 ? n_max - 1 : 0));
  append_text(out, x0 + w / 2.0, y0 + h + 14.0, "middle", "#555", 10, "step");

  // zero line when the range straddles it
  if (r.lo < 0.0 && r.hi > 0.0) {
    double yz = y0 + h * (r.hi / (r.hi - r.lo));
    out += "<line x1=\"" + px(x0) + "\" y1=\"" + px(yz) + "\" x2=\"" + px(x0 + w) + "\" y2=\"" +
           px(yz) + "\" stroke=\"#ddd\"/>\n";
  }

  double legend_x = ox + 6.0;
  for (const Series& s : panel.series) {
    if (!s.label.empty()) {
      append_text(out, legend_x, oy + 32.0, "start", s.color, 10,
                  s.label + (s.dashed ? " --" : ""));
      legend_x += 8.0 * static_cast<double>(s.label.size() + (s.dashed ? 4 : 1));
    }
    std::string points;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      double x = x0 + w * static_cast<double>(i) / x_den;
      double y = y0 + h * (r.hi - s.y[i]) / (r.hi - r.lo);
      points += px(x) + "," + px(y) + " ";
    }
    if (!points.empty()) {
      points.pop_back();
      append_polyline(out, points, s.color, s.dashed);
    }
  }
}

Series component_series(const std::vector<RigidBodyRecord>& records,
                        double (*pick)(const RigidBodyRecord&), const std::string& label,
                        const std::string& color, bool dashed) {
  Series s;
  s.label = label;
  s.color = color;
  s.dashed = dashed;
  s.y.reserve(records.size());
  for (const RigidBodyRecord& rec : records) s.y.push_back(pick(rec));
  return s;
}

}  // namespace

std::string svg_line_panels(const std::string& title, const std::vector<Panel>& panels) {
  const int cols = panels.size() > 1 ? 2 : 1;
  const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
  const double width = cols * kPanelW + (cols + 1) * kGap;
  const double height = kHeader + rows * kPanelH + (rows + 1) * kGap;

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) +
                    "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(width) + " " +
                    px(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append_text(out, kGap, 20.0, "start", "#000", 15, title);
  for (std::size_t i = 0; i < panels.size(); ++i) {
    double ox = kGap + static_cast<double>(i % cols) * (kPanelW + kGap);
    double oy = kHeader + kGap + static_cast<double>(i / cols) * (kPanelH + kGap);
    append_panel(out, panels[i], ox, oy);
  }
  out += "</svg>\n";
  return out;
}

std::string trajectory_svg(const std::vector<RigidBodyRecord>& truth,
                           const std::vector<RigidBodyRecord>& predicted) {
  if (truth.empty() || predicted.empty())
    throw DegenerateInput("trajectory plot needs at least one record on each side");

  const char* cx = "#c0392b";
  const char* cy = "#27813f";
  const char* cz = "#1a56c4";
  const char* cw = "#b8860b";

  auto panel3 = [&](const std::string& title, double (*fx)(const RigidBodyRecord&),
                    double (*fy)(const RigidBodyRecord&), double (*fz)(const RigidBodyRecord&)) {
    Panel p{title,
            {component_series(truth, fx, "x", cx, false),
             component_series(truth, fy, "y", cy, false),
             component_series(truth, fz, "z", cz, false),
             component_series(predicted, fx, "", cx, true),
             component_series(predicted, fy, "", cy, true),
             component_series(predicted, fz, "", cz, true)}};
    return p;
  };

  Panel orientation{"orientation quaternion", {}};
  auto qw = [](const RigidBodyRecord& r) { return r.orientation.w; };
  auto qx = [](const RigidBodyRecord& r) { return r.orientation.x; };
  auto qy = [](const RigidBodyRecord& r) { return r.orientation.y; };
  auto qz = [](const RigidBodyRecord& r) { return r.orientation.z; };
  orientation.series = {component_series(truth, qw, "w", cw, false),
                        component_series(truth, qx, "x", cx, false),
                        component_series(truth, qy, "y", cy, false),
                        component_series(truth, qz, "z", cz, false),
                        component_series(predicted, qw, "", cw, true),
                        component_series(predicted, qx, "", cx, true),
                        component_series(predicted, qy, "", cy, true),
                        component_series(predicted, qz, "", cz, true)};

  std::vector<Panel> panels = {
      panel3(
          "centre of mass", [](const RigidBodyRecord& r) { return r.position.x(); },
          [](const RigidBodyRecord& r) { return r.position.y(); },
          [](const RigidBodyRecord& r) { return r.position.z(); }),
      orientation,
      panel3(
          "velocity", [](const RigidBodyRecord& r) { return r.velocity.x(); },
          [](const RigidBodyRecord& r) { return r.velocity.y(); },
          [](const RigidBodyRecord& r) { return r.velocity.z(); }),
      panel3(
          "angular velocity", [](const RigidBodyRecord& r) { return r.angular_velocity.x(); },
          [](const RigidBodyRecord& r) { return r.angular_velocity.y(); },
          [](const RigidBodyRecord& r) { return r.angular_velocity.z(); })};
  return svg_line_panels("state vs step: truth solid, prediction dashed", panels);
}

std::string cuboid_poses_svg(const Eigen::Vector3d& half_dims,
                             const std::vector<DualQuaternion>& poses,
                             const std::vector<std::string>& labels) {
  if (poses.empty()) throw DegenerateInput("no poses to draw");
  if ((half_dims.array() <= 0.0).any()) throw DegenerateInput("half_dims must be positive");
  if (!labels.empty() && labels.size() != poses.size())
    throw ShapeError("one label per pose, or none");

  // fixed orthographic view: azimuth 35 deg, elevation 25 deg
  const double az = 35.0 * M_PI / 180.0;
  const double el = 25.0 * M_PI / 180.0;
  const Eigen::Vector3d u{std::cos(az), std::sin(az), 0.0};
  const Eigen::Vector3d v{-std::sin(az) * std::sin(el), std::cos(az) * std::sin(el),
                          std::cos(el)};
  auto project = [&](const Eigen::Vector3d& p) {
    return Eigen::Vector2d{p.dot(u), -p.dot(v)};
  };

  const double axis_len = 1.5 * half_dims.maxCoeff();
  std::vector<Eigen::Vector3d> axes = {Eigen::Vector3d::Zero(), {axis_len, 0, 0},
                                       {0, axis_len, 0}, {0, 0, axis_len}};

  // corner c of the cuboid: signs from the bits of c
  auto corner = [&](int c) {
    return Eigen::Vector3d{(c & 1) ? half_dims.x() : -half_dims.x(),
                           (c & 2) ? half_dims.y() : -half_dims.y(),
                           (c & 4) ? half_dims.z() : -half_dims.z()};
  };

  std::vector<std::vector<Eigen::Vector2d>> projected(poses.size());
  Eigen::Vector2d lo{1e300, 1e300};
  Eigen::Vector2d hi{-1e300, -1e300};
  auto grow = [&](const Eigen::Vector2d& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  };
  for (std::size_t k = 0; k < poses.size(); ++k) {
    projected[k].resize(8);
    for (int c = 0; c < 8; ++c) {
      projected[k][c] = project(dq_transform_point(poses[k], corner(c)));
      grow(projected[k][c]);
    }
  }
  for (const Eigen::Vector3d& a : axes) grow(project(a));

  const double view_w = 640.0, view_h = 480.0, margin = 48.0;
  Eigen::Vector2d span = (hi - lo).cwiseMax(1e-9);
  const double scale =
      std::min((view_w - 2 * margin) / span.x(), (view_h - 2 * margin) / span.y());
  auto to_screen = [&](const Eigen::Vector2d& p) {
    Eigen::Vector2d centered = p - 0.5 * (lo + hi);
    return Eigen::Vector2d{view_w / 2.0 + scale * centered.x(),
                           view_h / 2.0 + scale * centered.y()};
  };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(view_w) +
                    "\" height=\"" + px(view_h) + "\" viewBox=\"0 0 " + px(view_w) + " " +
                    px(view_h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const char* axis_colors[3] = {"#c0392b", "#27813f", "#1a56c4"};
  const char* axis_names[3] = {"x", "y", "z"};
  Eigen::Vector2d o2 = to_screen(project(axes[0]));
  for (int a = 0; a < 3; ++a) {
    Eigen::Vector2d e2 = to_screen(project(axes[a + 1]));
    out += "<line x1=\"" + px(o2.x()) + "\" y1=\"" + px(o2.y()) + "\" x2=\"" + px(e2.x()) +
           "\" y2=\"" + px(e2.y()) + "\" stroke=\"" + axis_colors[a] +
           "\" stroke-width=\"0.8\"/>\n";
    append_text(out, e2.x() + 4.0, e2.y(), "start", axis_colors[a], 11, axis_names[a]);
  }

  const char* palette[5] = {"#555555", "#1a56c4", "#e6632a", "#27813f", "#8b3fb8"};
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const char* color = palette[k % 5];
    out += "<g stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\">\n";
    for (int c1 = 0; c1 < 8; ++c1)
      for (int bit = 0; bit < 3; ++bit) {
        int c2 = c1 | (1 << bit);
        if (c2 == c1) continue;
        Eigen::Vector2d a = to_screen(projected[k][c1]);
        Eigen::Vector2d b = to_screen(projected[k][c2]);
        out += "<line x1=\"" + px(a.x()) + "\" y1=\"" + px(a.y()) + "\" x2=\"" + px(b.x()) +
               "\" y2=\"" + px(b.y()) + "\"/>\n";
      }
    out += "</g>\n";
    Eigen::Vector2d c2 = to_screen(project(dq_transform_point(poses[k], {0, 0, 0})));
    std::string label = labels.empty() ? "pose " + std::to_string(k) : labels[k];
    append_text(out, c2.x() + 6.0, c2.y() - 6.0, "start", color, 12, label);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dqrb
