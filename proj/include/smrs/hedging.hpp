#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "smrs/volterra.hpp"

namespace smrs {

/// Asset holdings xi and the discounted bank account epsilon at one point.
struct Strategy {
  Eigen::VectorXd xi;
  double epsilon = 0.0;
  double price = 0.0;  // phi at the point
};

/// xi from the integral form of the derivative; epsilon = discount * (phi - xi . s),
/// with `discount` the accumulated exp(-int_0^t r) (1 for a static query).
Strategy strategy_at(const VolterraSolver& solver, const PriceField& field, const StatePoint& p,
                     double discount = 1.0);

/// xi per asset and the undiscounted cash position phi - xi . s on the grid.
struct HedgeField {
  std::vector<PriceField> xi;
  PriceField cash;

  /// Largest |xi| over every node and asset.
  double max_abs_xi() const;
  /// Columns xi1..xin then eps.
  void write_csv(std::ostream& os, const RegimeSpace& space) const;
};

HedgeField build_hedge_field(const VolterraSolver& solver, const PriceField& field);

}  // namespace smrs
