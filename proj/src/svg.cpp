#include "cpgait/svg.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "cpgait/csv.hpp"

namespace cpgait {

namespace {

constexpr double kW = 520, kH = 520, kLeft = 70, kRight = 20, kTop = 60, kBottom = 55;

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string f2(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string tick(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

}  // namespace

SvgPlot::SvgPlot(double x0, double x1, double y0, double y1, std::string title, std::string xlabel,
                 std::string ylabel)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1), title_(std::move(title)), xlabel_(std::move(xlabel)),
      ylabel_(std::move(ylabel)) {
  if (x1_ == x0_) x1_ = x0_ + 1.0;
  if (y1_ == y0_) y1_ = y0_ + 1.0;
}

double SvgPlot::px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kW - kLeft - kRight); }
double SvgPlot::py(double y) const { return kH - kBottom - (y - y0_) / (y1_ - y0_) * (kH - kTop - kBottom); }

void SvgPlot::polyline(const std::vector<std::array<double, 2>>& pts, const std::string& color, double width,
                       bool dashed) {
  if (pts.size() < 2) return;
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << f2(width) << "\"";
  if (dashed) s << " stroke-dasharray=\"5,3\"";
  s << " points=\"";
  for (const auto& p : pts) {
    if (!std::isfinite(p[0]) || !std::isfinite(p[1])) continue;
    s << f2(px(p[0])) << ',' << f2(py(p[1])) << ' ';
  }
  s << "\"/>";
  body_.push_back(s.str());
}

void SvgPlot::marker(double x, double y, const std::string& color, const std::string& shape, double r) {
  std::ostringstream s;
  const double cx = px(x), cy = py(y);
  if (shape == "square") {
    s << "<rect x=\"" << f2(cx - r) << "\" y=\"" << f2(cy - r) << "\" width=\"" << f2(2 * r) << "\" height=\""
      << f2(2 * r) << "\" fill=\"" << color << "\" stroke=\"black\" stroke-width=\"0.6\"/>";
  } else if (shape == "triangle") {
    s << "<polygon points=\"" << f2(cx) << ',' << f2(cy - r) << ' ' << f2(cx - r) << ',' << f2(cy + r) << ' '
      << f2(cx + r) << ',' << f2(cy + r) << "\" fill=\"" << color << "\" stroke=\"black\" stroke-width=\"0.6\"/>";
  } else {
    s << "<circle cx=\"" << f2(cx) << "\" cy=\"" << f2(cy) << "\" r=\"" << f2(r) << "\" fill=\"" << color
      << "\" stroke=\"black\" stroke-width=\"0.6\"/>";
  }
  body_.push_back(s.str());
}

void SvgPlot::note(const std::string& text) { notes_.push_back(text); }

std::string SvgPlot::str(bool deterministic) const {
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!deterministic) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    s << "<!-- generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " -->\n";
  }
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW
    << ' ' << kH << "\" font-family=\"sans-serif\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
    << "</text>\n";
  for (std::size_t i = 0; i < notes_.size(); ++i) {
    s << "<text x=\"" << kW / 2 << "\" y=\"" << 38 + 13 * i << "\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(notes_[i]) << "</text>\n";
  }
  // frame and ticks
  s << "<rect x=\"" << f2(px(x0_)) << "\" y=\"" << f2(py(y1_)) << "\" width=\"" << f2(px(x1_) - px(x0_))
    << "\" height=\"" << f2(py(y0_) - py(y1_)) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = x0_ + (x1_ - x0_) * k / 4.0, y = y0_ + (y1_ - y0_) * k / 4.0;
    s << "<text x=\"" << f2(px(x)) << "\" y=\"" << f2(py(y0_) + 16) << "\" text-anchor=\"middle\" font-size=\"10\">"
      << tick(x) << "</text>\n";
    s << "<text x=\"" << f2(px(x0_) - 6) << "\" y=\"" << f2(py(y) + 3) << "\" text-anchor=\"end\" font-size=\"10\">"
      << tick(y) << "</text>\n";
  }
  s << "<text x=\"" << f2((px(x0_) + px(x1_)) / 2) << "\" y=\"" << kH - 12
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel_) << "</text>\n";
  s << "<text x=\"16\" y=\"" << f2((py(y0_) + py(y1_)) / 2) << "\" text-anchor=\"middle\" font-size=\"12\" "
    << "transform=\"rotate(-90 16 " << f2((py(y0_) + py(y1_)) / 2) << ")\">" << escape(ylabel_) << "</text>\n";
  s << "<g>\n";
  for (const auto& b : body_) s << b << '\n';
  s << "</g>\n</svg>\n";
  return s.str();
}

void SvgPlot::save(const std::string& path, bool deterministic) const { csv::write_atomic(path, str(deterministic)); }

}  // namespace cpgait
