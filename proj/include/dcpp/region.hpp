#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dcpp {

// Axis-aligned box [lo_1,hi_1) x ... x [lo_d,hi_d).
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  double volume() const;
  bool contains(std::span<const double> x) const;
};

struct Cell {
  Box box;
  double intensity;  // constant base intensity on the box, >= 0

  double mass() const { return intensity * box.volume(); }
};

// Observation window: a finite union of pairwise disjoint boxes, each with a
// constant intensity.  The mass of a cell is intensity * volume.
class Region {
 public:
  Region(std::size_t dim, std::vector<Cell> cells);

  static Region single_cell(double mass);  // unit box [0,1) with the given mass

  std::size_t dim() const { return dim_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }
  double cell_mass(std::size_t i) const { return cells_[i].mass(); }
  double total_mass() const;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t locate(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::vector<Cell> cells_;
};

struct MarkedPoint {
  std::vector<double> x;
  long mark;         // jump size carried by the point, >= 1
  std::size_t cell;  // index of the region cell containing x
};

// Realization of a marked point process on a region.
class PointPattern {
 public:
  PointPattern(std::size_t dim, std::vector<MarkedPoint> points);

  std::size_t dim() const { return dim_; }
  const std::vector<MarkedPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  // sum of marks over the whole pattern / over one cell
  long total_weight() const;
  long cell_weight(std::size_t cell, std::size_t cell_count) const;

  // CSV with mandatory header x1,...,xd,mark
  void write_csv(std::ostream& os) const;
  static PointPattern read_csv(std::istream& is, const Region& region);

 private:
  std::size_t dim_;
  std::vector<MarkedPoint> points_;
};

}  // namespace dcpp
