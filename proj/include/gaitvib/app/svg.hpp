#pragma once

#include <string>
#include <vector>

namespace gaitvib::app {

struct BarSeries {
  std::string name;
  std::vector<double> values;  // one per category
};

/// Standalone SVG document of a grouped bar chart: one group per category,
/// one bar per series, with a y axis, legend and rotated category labels.
/// `comment` is embedded as an XML comment. Throws std::invalid_argument if a
/// series length differs from the category count or a value is negative or
/// not finite.
std::string grouped_bar_chart(const std::vector<std::string>& categories, const std::vector<BarSeries>& series,
                              const std::string& title, const std::string& y_label,
                              const std::string& comment = {});

/// Escapes &, <, >, " and ' for XML text and attributes.
std::string xml_escape(const std::string& s);

}  // namespace gaitvib::app
