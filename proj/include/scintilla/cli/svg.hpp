#pragma once

// Minimal SVG line plot with logarithmic axes.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "scintilla/error.hpp"

namespace scintilla::cli {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x, y;
};

struct Marker {
  double x, y;
  std::string color;
};

class LogLogPlot {
public:
  LogLogPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(Series s) { series_.push_back(std::move(s)); }
  void add_marker(Marker m) { markers_.push_back(m); }

  void write(std::ostream& os) const {
    double x0 = inf(), x1 = -inf(), y0 = inf(), y1 = -inf();
    for (const auto& s : series_) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) throw DomainError("LogLogPlot: non-positive data");
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
    }
    if (!(x1 > x0)) throw DomainError("LogLogPlot: empty x range");
    const double lx0 = std::floor(std::log10(x0)), lx1 = std::ceil(std::log10(x1));
    const double ly0 = std::floor(std::log10(y0)), ly1 = std::max(ly0 + 1.0, std::ceil(std::log10(y1)));
    auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * plot_w; };
    auto py = [&](double y) { return top + plot_h - (std::log10(y) - ly0) / (ly1 - ly0) * plot_h; };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
       << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(title_) << "</text>\n";

    for (double e = lx0; e <= lx1; e += 1.0) {
      const double x = px(std::pow(10.0, e));
      os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(x) << "\" y2=\""
         << fmt(top + plot_h) << "\" stroke=\"#ddd\"/>\n";
      os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(top + plot_h + 18) << "\" text-anchor=\"middle\" "
         << "font-size=\"12\">1e" << static_cast<int>(e) << "</text>\n";
    }
    for (double e = ly0; e <= ly1; e += 1.0) {
      const double y = py(std::pow(10.0, e));
      os << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left + plot_w) << "\" y2=\""
         << fmt(y) << "\" stroke=\"#ddd\"/>\n";
      os << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\" "
         << "font-size=\"12\">1e" << static_cast<int>(e) << "</text>\n";
    }
    os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(plot_w) << "\" height=\""
       << fmt(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 12)
       << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(x_label_) << "</text>\n";
    os << "<text x=\"18\" y=\"" << fmt(top + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"14\" "
       << "transform=\"rotate(-90 18 " << fmt(top + plot_h / 2) << ")\">" << escape(y_label_) << "</text>\n";

    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << (i ? " " : "") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
      os << "\"/>\n";
      const double ly = top + 20 + 18.0 * static_cast<double>(k);
      os << "<line x1=\"" << fmt(left + 14) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(left + 40) << "\" y2=\""
         << fmt(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << fmt(left + 46) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"12\">"
         << escape(s.label) << "</text>\n";
    }
    for (const auto& m : markers_) {
      os << "<circle class=\"marker\" cx=\"" << fmt(px(m.x)) << "\" cy=\"" << fmt(py(m.y))
         << "\" r=\"5\" fill=\"white\" stroke=\"" << m.color << "\" stroke-width=\"2\"/>\n";
    }
    os << "</svg>\n";
  }

private:
  static constexpr double width = 720, height = 520, left = 70, top = 40, plot_w = 620, plot_h = 420;

  static double inf() { return std::numeric_limits<double>::infinity(); }

  static std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, r.ptr);
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
      }
    }
    return out;
  }

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<Marker> markers_;
};

}  // namespace scintilla::cli
