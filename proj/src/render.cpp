#include "cpd/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cpd {

namespace {

struct View {
  Vec2 lo;
  Vec2 hi;
};

View view_for(const ScenarioRecord &record, const DomainGeometry &domain, std::size_t frame) {
  Box box = domain.bounds();
  const auto &frames = record.trajectory.frames;
  Vec2 plo{1e300, 1e300};
  Vec2 phi{-1e300, -1e300};
  for (std::size_t m : {std::size_t{0}, frame}) {
    if (m >= frames.size())
      continue;
    for (const Vec2 &p : frames[m].positions) {
      plo = {std::min(plo.x, p.x), std::min(plo.y, p.y)};
      phi = {std::max(phi.x, p.x), std::max(phi.y, p.y)};
    }
  }
  const bool have_points = plo.x <= phi.x;
  auto axis = [&](double lo, double hi, double plo_a, double phi_a, double &out_lo, double &out_hi) {
    out_lo = std::isfinite(lo) ? lo : (have_points ? plo_a - 1.0 : -2.0);
    out_hi = std::isfinite(hi) ? hi : (have_points ? phi_a + 1.0 : 2.0);
  };
  View v;
  axis(box.lo.x, box.hi.x, plo.x, phi.x, v.lo.x, v.hi.x);
  axis(box.lo.y, box.hi.y, plo.y, phi.y, v.lo.y, v.hi.y);
  const double pad = 0.05 * std::max(v.hi.x - v.lo.x, v.hi.y - v.lo.y);
  v.lo -= Vec2{pad, pad};
  v.hi += Vec2{pad, pad};
  return v;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Marching squares over the level set; one "M x y L x y" segment per crossing pair.
std::string outline_path(const DomainGeometry &domain, const View &view, double scale) {
  const double width = view.hi.x - view.lo.x;
  const double height = view.hi.y - view.lo.y;
  const double cell = std::max(width, height) / 400.0;
  const auto nx = static_cast<std::size_t>(std::ceil(width / cell));
  const auto ny = static_cast<std::size_t>(std::ceil(height / cell));
  std::vector<double> phi((nx + 1) * (ny + 1));
  auto at = [&](std::size_t i, std::size_t j) -> double & { return phi[j * (nx + 1) + i]; };
  auto pos = [&](std::size_t i, std::size_t j) { return Vec2{view.lo.x + i * cell, view.lo.y + j * cell}; };
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      at(i, j) = domain.level_set(pos(i, j));

  auto to_svg = [&](Vec2 p) { return Vec2{(p.x - view.lo.x) * scale, (view.hi.y - p.y) * scale}; };
  auto cross_point = [&](Vec2 a, double fa, Vec2 b, double fb) { return a + (fa / (fa - fb)) * (b - a); };

  std::ostringstream path;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Vec2 c[4] = {pos(i, j), pos(i + 1, j), pos(i + 1, j + 1), pos(i, j + 1)};
      const double f[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
      Vec2 hits[4];
      int count = 0;
      for (int e = 0; e < 4; ++e) {
        const int e2 = (e + 1) % 4;
        if ((f[e] < 0.0) != (f[e2] < 0.0))
          hits[count++] = cross_point(c[e], f[e], c[e2], f[e2]);
      }
      for (int s = 0; s + 1 < count; s += 2) {
        const Vec2 a = to_svg(hits[s]);
        const Vec2 b = to_svg(hits[s + 1]);
        path << 'M' << num(a.x) << ' ' << num(a.y) << 'L' << num(b.x) << ' ' << num(b.y);
      }
    }
  }
  return path.str();
}

} // namespace

std::string render_frame_svg(const ScenarioRecord &record, std::size_t frame) {
  const DomainGeometry domain = build_domain(record.config.domain);
  const auto &frames = record.trajectory.frames;
  if (!frames.empty() && frame >= frames.size())
    throw ConfigError("frame " + std::to_string(frame) + " out of range (" + std::to_string(frames.size()) +
                      " frames)");
  const View view = view_for(record, domain, frame);
  const double scale = 800.0 / std::max(view.hi.x - view.lo.x, view.hi.y - view.lo.y);
  const double w = (view.hi.x - view.lo.x) * scale;
  const double h = (view.hi.y - view.lo.y) * scale;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << ' ' << num(h) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<path fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" d=\"" << outline_path(domain, view, scale)
      << "\"/>\n";
  if (!frames.empty()) {
    const Frame &initial = frames.front();
    const Frame &f = frames[frame];
    const double radius = std::clamp(2.0 * std::sqrt(w * h / (50.0 * f.positions.size() + 1.0)) / 4.0, 0.8, 6.0);
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
      const bool red = record.config.color.red(initial.positions[i]);
      const Vec2 p{(f.positions[i].x - view.lo.x) * scale, (view.hi.y - f.positions[i].y) * scale};
      svg << "<circle cx=\"" << num(p.x) << "\" cy=\"" << num(p.y) << "\" r=\"" << num(radius) << "\" fill=\""
          << (red ? "#d62728" : "#1f77b4") << "\"/>\n";
    }
    svg << "<text x=\"8\" y=\"20\" font-family=\"monospace\" font-size=\"14\">" << record.config.name
        << " t=" << num(f.time) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_frame(const ScenarioRecord &record, std::size_t frame, const std::filesystem::path &path) {
  const std::string svg = render_frame_svg(record, frame);
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << svg;
}

} // namespace cpd
