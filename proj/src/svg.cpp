#include "distplan/svg.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace distplan {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

struct View {
  double xmin, ymin, xmax, ymax;
  double scale;
};

View view_for(const Scenario& s) {
  if (const auto* d = std::get_if<DubinsConfig>(&s.environment)) {
    return View{d->world.xmin, d->world.ymin, d->world.xmax, d->world.ymax, 100.0};
  }
  const auto& a = std::get<ArmConfig>(s.environment);
  double reach = 0.0;
  for (const auto& j : a.joints) reach += j.offset.norm();
  const double r = std::max(reach, 0.1) * 1.1;
  return View{-r, -r, r, r, 400.0 / r};
}

void ellipse(std::ostringstream& out, const Vector& mean, const Eigen::Matrix2d& cov, double k, const char* cls,
             const char* style) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d lam = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Vector2d major = es.eigenvectors().col(1);
  const double angle = std::atan2(major[1], major[0]) * 180.0 / std::numbers::pi;
  out << "<ellipse class=\"" << cls << "\" cx=\"" << num(mean[0]) << "\" cy=\"" << num(mean[1]) << "\" rx=\""
      << num(k * std::sqrt(lam[1])) << "\" ry=\"" << num(k * std::sqrt(lam[0])) << "\" transform=\"rotate("
      << num(angle) << " " << num(mean[0]) << " " << num(mean[1]) << ")\" " << style << "/>\n";
}

void gaussian_goal(std::ostringstream& out, const Gaussian& g, double opacity) {
  const Eigen::Matrix2d cov = g.covariance().topLeftCorner<2, 2>();
  char style[160];
  std::snprintf(style, sizeof(style),
                "fill=\"#2a9d8f\" fill-opacity=\"%.4f\" stroke=\"#2a9d8f\" stroke-width=\"0.02\"", opacity);
  ellipse(out, g.mean().head<2>(), cov, 1.0, "goal", style);
  ellipse(out, g.mean().head<2>(), cov, 2.0, "goal", style);
}

}  // namespace

std::string render_svg(const Scenario& scenario, const PlotInput& input) {
  const View v = view_for(scenario);
  const double w = (v.xmax - v.xmin) * v.scale;
  const double h = (v.ymax - v.ymin) * v.scale;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
  out << "<title>" << scenario.name << "</title>\n";
  out << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"#ffffff\"/>\n";
  // World coordinates with y up.
  out << "<g transform=\"translate(" << num(-v.xmin * v.scale) << " " << num(v.ymax * v.scale) << ") scale("
      << num(v.scale) << " " << num(-v.scale) << ")\">\n";

  if (const auto* d = std::get_if<DubinsConfig>(&scenario.environment)) {
    out << "<rect class=\"world\" x=\"" << num(d->world.xmin) << "\" y=\"" << num(d->world.ymin) << "\" width=\""
        << num(d->world.xmax - d->world.xmin) << "\" height=\"" << num(d->world.ymax - d->world.ymin)
        << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.04\"/>\n";
    for (const auto& r : d->obstacles) {
      out << "<rect class=\"obstacle\" x=\"" << num(r.xmin) << "\" y=\"" << num(r.ymin) << "\" width=\""
          << num(r.xmax - r.xmin) << "\" height=\"" << num(r.ymax - r.ymin) << "\" fill=\"#555555\"/>\n";
    }
    if (const auto* g = std::get_if<Gaussian>(&scenario.goal)) {
      gaussian_goal(out, *g, 0.3);
    } else if (const auto* m = std::get_if<Gmm>(&scenario.goal)) {
      for (std::size_t i = 0; i < m->size(); ++i) gaussian_goal(out, m->component(i), 0.6 * m->weight(i));
    } else if (const auto* p = std::get_if<DiracDelta>(&scenario.goal)) {
      out << "<circle class=\"goal\" cx=\"" << num(p->point[0]) << "\" cy=\"" << num(p->point[1])
          << "\" r=\"0.08\" fill=\"#2a9d8f\"/>\n";
    } else {
      const auto& b = std::get<UniformBox>(scenario.goal);
      out << "<rect class=\"goal\" x=\"" << num(b.lower()[0]) << "\" y=\"" << num(b.lower()[1]) << "\" width=\""
          << num(b.upper()[0] - b.lower()[0]) << "\" height=\"" << num(b.upper()[1] - b.lower()[1])
          << "\" fill=\"#2a9d8f\" fill-opacity=\"0.3\"/>\n";
    }
  } else {
    const auto& a = std::get<ArmConfig>(scenario.environment);
    for (const auto& s : a.obstacles) {
      out << "<circle class=\"obstacle\" cx=\"" << num(s.center[0]) << "\" cy=\"" << num(s.center[1]) << "\" r=\""
          << num(s.radius) << "\" fill=\"#555555\"/>\n";
    }
    out << "<circle class=\"goal\" cx=\"" << num(a.target[0]) << "\" cy=\"" << num(a.target[1])
        << "\" r=\"0.02\" fill=\"#e9c46a\"/>\n";
  }

  for (const auto& path : input.paths) {
    out << "<polyline class=\"path\" fill=\"none\" stroke=\"#264653\" stroke-width=\"0.03\" points=\"";
    for (std::size_t i = 0; i < path.size(); ++i) {
      out << (i ? " " : "") << num(path[i][0]) << "," << num(path[i][1]);
    }
    out << "\"/>\n";
  }
  if (std::holds_alternative<DubinsConfig>(scenario.environment)) {
    for (const auto& b : input.ellipses) {
      const Eigen::Matrix2d cov = b.covariance().topLeftCorner<2, 2>();
      ellipse(out, b.mean().head<2>(), cov, 1.0, "sigma1",
              "fill=\"#e76f51\" fill-opacity=\"0.25\" stroke=\"#e76f51\" stroke-width=\"0.015\"");
      ellipse(out, b.mean().head<2>(), cov, 2.0, "sigma2",
              "fill=\"none\" stroke=\"#e76f51\" stroke-width=\"0.015\" stroke-dasharray=\"0.05 0.05\"");
    }
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace distplan
