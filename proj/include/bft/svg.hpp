#pragma once
// Minimal SVG writer for map/tree/plot inspection output.

#include <fstream>
#include <sstream>
#include <string>

#include "bft/common.hpp"
#include "bft/geometry.hpp"

namespace bft {

class SvgWriter {
 public:
  // World is [0,w]x[0,h] in meters; y axis is flipped so +y points up.
  SvgWriter(double world_w, double world_h, double px_per_m = 4.0)
      : w_(world_w), h_(world_h), s_(px_per_m) {
    body_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w_ * s_)
          << "\" height=\"" << fmt(h_ * s_) << "\" viewBox=\"0 0 " << fmt(w_ * s_) << " "
          << fmt(h_ * s_) << "\">\n";
    body_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ << "<rect x=\"" << fmt(x * s_) << "\" y=\"" << fmt((h_ - y - h) * s_) << "\" width=\""
          << fmt(w * s_) << "\" height=\"" << fmt(h * s_) << "\" fill=\"" << fill << "\"/>\n";
  }

  void line(Vec2 a, Vec2 b, const std::string& stroke, double width_px = 1.0) {
    body_ << "<line x1=\"" << fmt(a.x * s_) << "\" y1=\"" << fmt((h_ - a.y) * s_) << "\" x2=\""
          << fmt(b.x * s_) << "\" y2=\"" << fmt((h_ - b.y) * s_) << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << fmt(width_px) << "\"/>\n";
  }

  void circle(Vec2 c, double r_px, const std::string& fill) {
    body_ << "<circle cx=\"" << fmt(c.x * s_) << "\" cy=\"" << fmt((h_ - c.y) * s_) << "\" r=\""
          << fmt(r_px) << "\" fill=\"" << fill << "\"/>\n";
  }

  void save(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write SVG file: " + path);
    out << body_.str() << "</svg>\n";
  }

 private:
  static std::string fmt(double v) { return fmt_double(v, 8); }
  double w_, h_, s_;
  std::ostringstream body_;
};

}  // namespace bft
