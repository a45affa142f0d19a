#include "smrs/hedging.hpp"

#include <cmath>
#include <string>

#include "smrs/error.hpp"

namespace smrs {

Strategy strategy_at(const VolterraSolver& solver, const PriceField& field, const StatePoint& p, double discount) {
  if (!(discount > 0.0 && discount <= 1.0)) throw Error("strategy_at: discount must lie in (0, 1]");
  const int n = solver.grid().assets();
  Strategy out;
  out.xi.resize(n);
  for (int a = 0; a < n; ++a) out.xi(a) = solver.hedge_ratio(field, p, a);
  out.price = solver.evaluate(field, p);
  out.epsilon = discount * (out.price - out.xi.dot(p.s));
  return out;
}

double HedgeField::max_abs_xi() const {
  double worst = 0.0;
  for (const PriceField& f : xi) {
    for (int i = 0; i <= f.grid().time_steps(); ++i) {
      for (double v : f.slice(i)) worst = std::max(worst, std::abs(v));
    }
  }
  return worst;
}

void HedgeField::write_csv(std::ostream& os, const RegimeSpace& space) const {
  std::vector<const PriceField*> fields;
  std::vector<std::string> names;
  for (std::size_t a = 0; a < xi.size(); ++a) {
    fields.push_back(&xi[a]);
    names.push_back("xi" + std::to_string(a + 1));
  }
  fields.push_back(&cash);
  names.emplace_back("eps");
  write_fields_csv(os, space, fields, names);
}

HedgeField build_hedge_field(const VolterraSolver& solver, const PriceField& field) {
  const Grid& g = solver.grid();
  const int n = g.assets();
  std::vector<PriceField> xi;
  for (int a = 0; a < n; ++a) xi.push_back(solver.hedge_field(field, a));
  PriceField cash = field;
  for (int i = 0; i <= g.time_steps(); ++i) {
    auto& out = cash.slice(i);
    const std::size_t np = g.price_count();
    for (std::size_t k = 0; k < out.size(); ++k) {
      const Eigen::VectorXd s = g.price_at(k % np);
      for (int a = 0; a < n; ++a) out[k] -= xi[a].slice(i)[k] * s(a);
    }
  }
  return HedgeField{std::move(xi), std::move(cash)};
}

}  // namespace smrs
