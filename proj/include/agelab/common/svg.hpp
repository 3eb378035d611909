#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace agelab::util {

/// Minimal SVG chart writer: axes with tick labels plus points, polylines,
/// step lines and filled bands in data coordinates.
class SvgPlot {
  public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max, std::string title,
            std::string x_label, std::string y_label);

    void add_points(const std::vector<double> &x, const std::vector<double> &y,
                    const std::string &color, double radius = 2.0);
    void add_line(const std::vector<double> &x, const std::vector<double> &y,
                  const std::string &color, double width = 1.5, bool dashed = false);
    /// Horizontal-then-vertical steps (survival curves).
    void add_steps(const std::vector<double> &x, const std::vector<double> &y,
                   const std::string &color, double width = 1.5);
    /// Filled band between (x, y_low) and (x, y_high).
    void add_band(const std::vector<double> &x, const std::vector<double> &y_low,
                  const std::vector<double> &y_high, const std::string &color,
                  double opacity = 0.25);
    void add_caption(const std::string &text);

    void save(const std::filesystem::path &path) const;

  private:
    double to_px_x(double x) const;
    double to_px_y(double y) const;

    double x_min_, x_max_, y_min_, y_max_;
    std::string title_, x_label_, y_label_;
    std::vector<std::string> body_;
    std::vector<std::string> captions_;
};

} // namespace agelab::util
