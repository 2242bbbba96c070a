#pragma once

#include <string>
#include <vector>

namespace xplab {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct AxesSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Points with y <= 0 are dropped on a log axis.
  bool log_y = false;
  double width_px = 640.0;
  double height_px = 420.0;
};

std::string plot_svg(const std::vector<Series>& series, const AxesSpec& axes);

/// Throws xpl::IoError when the file cannot be written.
void emit_plot(const std::vector<Series>& series, const AxesSpec& axes, const std::string& path);

}  // namespace xplab
