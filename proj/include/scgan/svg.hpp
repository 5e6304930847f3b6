#pragma once

#include <string>
#include <vector>

#include "scgan/matrix.hpp"

namespace scgan {

// Minimal static SVG builder. Output bytes are deterministic: fixed float
// formatting, no timestamps.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& stroke,
            const std::string& fill);
  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width);
  void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0);
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                double width);
  void text(double x, double y, const std::string& s, int font_size = 12,
            const std::string& anchor = "start");

  std::string str() const;
  void write(const std::string& path) const;

 private:
  double width_, height_;
  std::string body_;
};

// Maps a data rectangle onto a pixel rectangle (y flipped).
struct PlotFrame {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;  // data bounds
  double px = 50.0, py = 20.0, pw = 500.0, ph = 400.0;

  double sx(double x) const { return px + (x - x0) / (x1 - x0) * pw; }
  double sy(double y) const { return py + (y1 - y) / (y1 - y0) * ph; }
};

const std::vector<std::string>& class_palette();

}  // namespace scgan
