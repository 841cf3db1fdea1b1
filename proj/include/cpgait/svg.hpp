#pragma once

#include <array>
#include <string>
#include <vector>

namespace cpgait {

/// Minimal SVG line/marker plot on a fixed data window.
class SvgPlot {
 public:
  SvgPlot(double x0, double x1, double y0, double y1, std::string title, std::string xlabel = "",
          std::string ylabel = "");

  void polyline(const std::vector<std::array<double, 2>>& pts, const std::string& color, double width = 1.5,
                bool dashed = false);
  /// shape: "circle", "square" or "triangle".
  void marker(double x, double y, const std::string& color, const std::string& shape = "circle", double r = 4.0);
  void note(const std::string& text);  // extra line under the title

  std::string str(bool deterministic) const;
  /// Atomic write; a timestamp comment is embedded unless deterministic.
  void save(const std::string& path, bool deterministic) const;

 private:
  double px(double x) const;
  double py(double y) const;

  double x0_, x1_, y0_, y1_;
  std::string title_, xlabel_, ylabel_;
  std::vector<std::string> notes_;
  std::vector<std::string> body_;
};

/// Colour convention shared by all plots.
inline constexpr const char* kTheta1Nullcline = "#1f4fd1";
inline constexpr const char* kTheta2Nullcline = "#d1271f";
inline constexpr const char* kSinkColor = "#1a9a2a";
inline constexpr const char* kSourceColor = "#d1271f";
inline constexpr const char* kSaddleColor = "#f08c00";

}  // namespace cpgait
