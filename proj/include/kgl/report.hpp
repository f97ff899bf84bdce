#pragma once

#include <string>
#include <vector>

namespace kgl {

// Deterministic number formatting shared by all emitted files: %.17g, so a
// value round-trips exactly and two identical runs produce identical bytes.
std::string fmt(double v);
std::string fmt(int v);
std::string fmt(bool v);           // "true" / "false"
inline std::string fmt(const std::string& v) { return v; }
inline std::string fmt(const char* v) { return v; }

// Column-checked CSV assembly; rows must match the header width.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  template <class... Ts>
  void add_row(const Ts&... cells) {
    push_row({fmt(cells)...});
  }
  void push_row(std::vector<std::string> cells);

  int rows() const { return static_cast<int>(rows_.size()); }
  std::string to_text() const;
  void write(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal standalone SVG with one polyline per series, log-free linear axes.
// Intended for quick (R, value) sweeps; series are drawn in the order given.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_line_plot(const std::string& title,
                          const std::vector<PlotSeries>& series);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace kgl
