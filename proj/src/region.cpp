#include "dcpp/region.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dcpp {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Closed-box overlap test; boxes are half open so touching faces are fine.
bool boxes_overlap(const Box& a, const Box& b) {
  for (std::size_t d = 0; d < a.lo.size(); ++d) {
    if (a.hi[d] <= b.lo[d] || b.hi[d] <= a.lo[d]) {
      return false;
    }
  }
  return true;
}

}  // namespace

double Box::volume() const {
  double v = 1.0;
  for (std::size_t d = 0; d < lo.size(); ++d) {
    v *= hi[d] - lo[d];
  }
  return v;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (x[d] < lo[d] || x[d] >= hi[d]) {
      return false;
    }
  }
  return true;
}

Region::Region(std::size_t dim, std::vector<Cell> cells)
    : dim_(dim), cells_(std::move(cells)) {
  if (dim_ == 0) {
    throw std::invalid_argument("Region: dimension must be positive");
  }
  for (const Cell& c : cells_) {
    if (c.box.lo.size() != dim_ || c.box.hi.size() != dim_) {
      throw std::invalid_argument("Region: box dimension mismatch");
    }
    for (std::size_t d = 0; d < dim_; ++d) {
      if (!(c.box.lo[d] < c.box.hi[d])) {
        throw std::invalid_argument("Region: box sides must have positive length");
      }
    }
    if (!(c.intensity >= 0.0) || !std::isfinite(c.intensity)) {
      throw std::invalid_argument("Region: intensity must be nonnegative and finite");
    }
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (std::size_t j = i + 1; j < cells_.size(); ++j) {
      if (boxes_overlap(cells_[i].box, cells_[j].box)) {
        throw std::invalid_argument("Region: cells must be pairwise disjoint");
      }
    }
  }
}

Region Region::single_cell(double mass) {
  if (!(mass > 0.0)) {
    throw std::invalid_argument("Region::single_cell: mass must be positive");
  }
  return Region(1, {Cell{Box{{0.0}, {1.0}}, mass}});
}

double Region::total_mass() const {
  double m = 0.0;
  for (const Cell& c : cells_) {
    m += c.mass();
  }
  return m;
}

std::size_t Region::locate(std::span<const double> x) const {
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (cells_[i].box.contains(x)) {
      return i;
    }
  }
  return npos;
}

PointPattern::PointPattern(std::size_t dim, std::vector<MarkedPoint> points)
    : dim_(dim), points_(std::move(points)) {
  for (const MarkedPoint& pt : points_) {
    if (pt.x.size() != dim_) {
      throw std::invalid_argument("PointPattern: point dimension mismatch");
    }
    if (pt.mark < 1) {
      throw std::invalid_argument("PointPattern: marks must be >= 1");
    }
  }
}

long PointPattern::total_weight() const {
  long w = 0;
  for (const MarkedPoint& pt : points_) {
    w += pt.mark;
  }
  return w;
}

long PointPattern::cell_weight(std::size_t cell, std::size_t cell_count) const {
  if (cell >= cell_count) {
    throw std::out_of_range("PointPattern::cell_weight: cell index out of range");
  }
  long w = 0;
  for (const MarkedPoint& pt : points_) {
    if (pt.cell == cell) {
      w += pt.mark;
    }
  }
  return w;
}

void PointPattern::write_csv(std::ostream& os) const {
  for (std::size_t d = 1; d <= dim_; ++d) {
    os << 'x' << d << ',';
  }
  os << "mark\n";
  for (const MarkedPoint& pt : points_) {
    for (double c : pt.x) {
      os << format_double(c) << ',';
    }
    os << pt.mark << '\n';
  }
}

PointPattern PointPattern::read_csv(std::istream& is, const Region& region) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("PointPattern: empty input, header required");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  std::string want;
  for (std::size_t d = 1; d <= region.dim(); ++d) {
    want += "x" + std::to_string(d) + ",";
  }
  want += "mark";
  if (line != want) {
    throw std::invalid_argument("PointPattern: bad header, expected '" + want +
                                "' got '" + line + "'");
  }

  std::vector<MarkedPoint> points;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    MarkedPoint pt;
    pt.x.reserve(region.dim());
    for (std::size_t d = 0; d < region.dim(); ++d) {
      if (!std::getline(ss, tok, ',')) {
        throw std::invalid_argument("PointPattern: short row at line " +
                                    std::to_string(lineno));
      }
      pt.x.push_back(std::stod(tok));
    }
    if (!std::getline(ss, tok, ',')) {
      throw std::invalid_argument("PointPattern: missing mark at line " +
                                  std::to_string(lineno));
    }
    pt.mark = std::stol(tok);
    pt.cell = region.locate(pt.x);
    if (pt.cell == Region::npos) {
      throw std::invalid_argument("PointPattern: point outside the region at line " +
                                  std::to_string(lineno));
    }
    points.push_back(std::move(pt));
  }
  return PointPattern(region.dim(), std::move(points));
}

}  // namespace dcpp
