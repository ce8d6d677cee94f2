#include "gaitvib/app/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gaitvib/core/numfmt.hpp"

namespace gaitvib::app {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

// Round axis maximum: 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (v <= 0.0) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= v) return m * p;
  return 10.0 * p;
}

std::string num(double v) { return format_sig(v, 6); }

}  // namespace

std::string grouped_bar_chart(const std::vector<std::string>& categories, const std::vector<BarSeries>& series,
                              const std::string& title, const std::string& y_label, const std::string& comment) {
  double vmax = 0.0;
  for (const auto& s : series) {
    if (s.values.size() != categories.size())
      throw std::invalid_argument("series '" + s.name + "' does not match the category count");
    for (double v : s.values) {
      if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("bar values must be finite and non-negative");
      vmax = std::max(vmax, v);
    }
  }
  const double top = nice_ceiling(vmax);
  const double left = 70, right = 20, head = 50, plot_h = 300, foot = 130;
  const double group_w = 60;
  const double plot_w = group_w * static_cast<double>(std::max<std::size_t>(1, categories.size()));
  const double width = left + plot_w + right, height = head + plot_h + foot;
  const double bar_w = series.empty() ? 0.0 : (group_w * 0.8) / static_cast<double>(series.size());
  auto y_of = [&](double v) { return head + plot_h * (1.0 - v / top); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) {
    std::string c = comment;
    for (std::size_t p; (p = c.find("--")) != std::string::npos;) c.replace(p, 2, "- -");
    os << "<!-- " << c << " -->\n";
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "  <text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
     << "</text>\n";

  // Grid and y axis ticks.
  for (int k = 0; k <= 5; ++k) {
    const double v = top * k / 5.0, y = y_of(v);
    os << "  <line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + plot_w) << "\" y2=\""
       << num(y) << "\" stroke=\"#dddddd\"/>\n";
    os << "  <text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << num(v)
       << "</text>\n";
  }
  os << "  <line x1=\"" << num(left) << "\" y1=\"" << num(head) << "\" x2=\"" << num(left) << "\" y2=\""
     << num(head + plot_h) << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << num(left) << "\" y1=\"" << num(head + plot_h) << "\" x2=\"" << num(left + plot_w)
     << "\" y2=\"" << num(head + plot_h) << "\" stroke=\"black\"/>\n";
  os << "  <text transform=\"translate(18 " << num(head + plot_h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << xml_escape(y_label) << "</text>\n";

  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x0 = left + group_w * static_cast<double>(c) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = series[s].values[c];
      const double x = x0 + bar_w * static_cast<double>(s);
      os << "  <rect x=\"" << num(x) << "\" y=\"" << num(y_of(v)) << "\" width=\"" << num(bar_w) << "\" height=\""
         << num(head + plot_h - y_of(v)) << "\" fill=\"" << kPalette[s % std::size(kPalette)] << "\"><title>"
         << xml_escape(series[s].name + " " + categories[c] + ": " + num(v)) << "</title></rect>\n";
    }
    const double lx = left + group_w * (static_cast<double>(c) + 0.5), ly = head + plot_h + 10;
    os << "  <text transform=\"translate(" << num(lx) << ' ' << num(ly) << ") rotate(45)\">"
       << xml_escape(categories[c]) << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const double x = left + 10 + 110 * static_cast<double>(s), y = height - 18;
    os << "  <rect x=\"" << num(x) << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
       << kPalette[s % std::size(kPalette)] << "\"/>\n";
    os << "  <text x=\"" << num(x + 18) << "\" y=\"" << num(y) << "\">" << xml_escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gaitvib::app
