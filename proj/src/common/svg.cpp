#include "agelab/common/svg.hpp"

#include "agelab/common/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace agelab::util {

namespace {
constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 48.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Round tick spacing to 1/2/5 x 10^k.
double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm < 1.5) {
        return mag;
    }
    if (norm < 3.5) {
        return 2.0 * mag;
    }
    if (norm < 7.5) {
        return 5.0 * mag;
    }
    return 10.0 * mag;
}

} // namespace

SvgPlot::SvgPlot(double x_min, double x_max, double y_min, double y_max, std::string title,
                 std::string x_label, std::string y_label)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), title_(std::move(title)),
      x_label_(std::move(x_label)), y_label_(std::move(y_label)) {
    if (!(x_max_ > x_min_)) {
        x_max_ = x_min_ + 1.0;
    }
    if (!(y_max_ > y_min_)) {
        y_max_ = y_min_ + 1.0;
    }
}

double SvgPlot::to_px_x(double x) const {
    return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) * (kWidth - kMarginLeft - kMarginRight);
}

double SvgPlot::to_px_y(double y) const {
    return kHeight - kMarginBottom -
           (y - y_min_) / (y_max_ - y_min_) * (kHeight - kMarginTop - kMarginBottom);
}

void SvgPlot::add_points(const std::vector<double> &x, const std::vector<double> &y,
                         const std::string &color, double radius) {
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        std::ostringstream os;
        os << "<circle cx='" << fmt(to_px_x(x[i])) << "' cy='" << fmt(to_px_y(y[i])) << "' r='"
           << radius << "' fill='" << color << "' fill-opacity='0.5'/>";
        body_.push_back(os.str());
    }
}

void SvgPlot::add_line(const std::vector<double> &x, const std::vector<double> &y,
                       const std::string &color, double width, bool dashed) {
    if (x.size() < 2) {
        return;
    }
    std::ostringstream os;
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width << "'";
    if (dashed) {
        os << " stroke-dasharray='6 4'";
    }
    os << " points='";
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        os << fmt(to_px_x(x[i])) << ',' << fmt(to_px_y(y[i])) << ' ';
    }
    os << "'/>";
    body_.push_back(os.str());
}

void SvgPlot::add_steps(const std::vector<double> &x, const std::vector<double> &y,
                        const std::string &color, double width) {
    if (x.empty()) {
        return;
    }
    std::ostringstream os;
    os << "<polyline fill='none' stroke='" << color << "' stroke-width='" << width
       << "' points='";
    double prev_y = 1.0;
    os << fmt(to_px_x(x_min_)) << ',' << fmt(to_px_y(prev_y)) << ' ';
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        os << fmt(to_px_x(x[i])) << ',' << fmt(to_px_y(prev_y)) << ' ';
        os << fmt(to_px_x(x[i])) << ',' << fmt(to_px_y(y[i])) << ' ';
        prev_y = y[i];
    }
    os << fmt(to_px_x(x_max_)) << ',' << fmt(to_px_y(prev_y)) << ' ';
    os << "'/>";
    body_.push_back(os.str());
}

void SvgPlot::add_band(const std::vector<double> &x, const std::vector<double> &y_low,
                       const std::vector<double> &y_high, const std::string &color,
                       double opacity) {
    if (x.size() < 2) {
        return;
    }
    std::ostringstream os;
    os << "<polygon fill='" << color << "' fill-opacity='" << opacity << "' stroke='none' points='";
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << fmt(to_px_x(x[i])) << ',' << fmt(to_px_y(y_high[i])) << ' ';
    }
    for (std::size_t i = x.size(); i-- > 0;) {
        os << fmt(to_px_x(x[i])) << ',' << fmt(to_px_y(y_low[i])) << ' ';
    }
    os << "'/>";
    body_.push_back(os.str());
}

void SvgPlot::add_caption(const std::string &text) { captions_.push_back(text); }

void SvgPlot::save(const std::filesystem::path &path) const {
    std::ofstream out(path);
    if (!out) {
        throw AgelabError("cannot write SVG: " + path.string());
    }
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight
        << "' viewBox='0 0 " << kWidth << ' ' << kHeight << "'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << kWidth / 2 << "' y='20' text-anchor='middle' font-size='14'>"
        << title_ << "</text>\n";

    // axes
    out << "<line x1='" << kMarginLeft << "' y1='" << kHeight - kMarginBottom << "' x2='"
        << kWidth - kMarginRight << "' y2='" << kHeight - kMarginBottom
        << "' stroke='black'/>\n";
    out << "<line x1='" << kMarginLeft << "' y1='" << kMarginTop << "' x2='" << kMarginLeft
        << "' y2='" << kHeight - kMarginBottom << "' stroke='black'/>\n";

    const double x_step = nice_step(x_max_ - x_min_);
    for (double t = std::ceil(x_min_ / x_step) * x_step; t <= x_max_ + 1e-9; t += x_step) {
        out << "<line x1='" << to_px_x(t) << "' y1='" << kHeight - kMarginBottom << "' x2='"
            << to_px_x(t) << "' y2='" << kHeight - kMarginBottom + 4 << "' stroke='black'/>\n";
        out << "<text x='" << to_px_x(t) << "' y='" << kHeight - kMarginBottom + 16
            << "' text-anchor='middle' font-size='10'>" << fmt(t) << "</text>\n";
    }
    const double y_step = nice_step(y_max_ - y_min_);
    for (double t = std::ceil(y_min_ / y_step) * y_step; t <= y_max_ + 1e-9; t += y_step) {
        out << "<line x1='" << kMarginLeft - 4 << "' y1='" << to_px_y(t) << "' x2='"
            << kMarginLeft << "' y2='" << to_px_y(t) << "' stroke='black'/>\n";
        out << "<text x='" << kMarginLeft - 8 << "' y='" << to_px_y(t) + 3
            << "' text-anchor='end' font-size='10'>" << fmt(t) << "</text>\n";
    }
    out << "<text x='" << (kMarginLeft + kWidth - kMarginRight) / 2 << "' y='"
        << kHeight - 10 << "' text-anchor='middle' font-size='12'>" << x_label_ << "</text>\n";
    out << "<text x='14' y='" << (kMarginTop + kHeight - kMarginBottom) / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 14 "
        << (kMarginTop + kHeight - kMarginBottom) / 2 << ")'>" << y_label_ << "</text>\n";

    for (const auto &line : body_) {
        out << line << '\n';
    }
    double caption_y = kMarginTop + 12;
    for (const auto &caption : captions_) {
        out << "<text x='" << kWidth - kMarginRight - 6 << "' y='" << caption_y
            << "' text-anchor='end' font-size='11'>" << caption << "</text>\n";
        caption_y += 14;
    }
    out << "</svg>\n";
}

} // namespace agelab::util
