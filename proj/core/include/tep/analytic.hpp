#pragma once

#include <array>
#include <variant>

namespace tep::analytic {

/// Inverse-form linear curve pi = intercept + slope * q. Demand curves have a
/// negative slope, supply curves a positive one. Quantities are clamped at zero.
struct LinearCurve {
    double intercept = 0.0;
    double slope = 0.0;

    double price_at(double q) const { return intercept + slope * q; }
    double quantity_at(double price) const;

    /// Area between the curve and a horizontal price line on the side where the
    /// curve trades: consumer surplus for demand, producer surplus for supply.
    double surplus_at(double price) const;
};

struct Capacity {
    double mw = 0.0;
};
struct MarginalCost {
    double eur_per_mw = 0.0;
};

/// Node 1 and node 2 linked by one line; positive flow goes from node 2 to node 1.
struct TwoNodeSolution {
    double autarky_price1 = 0.0;
    double autarky_price2 = 0.0;
    double common_price = 0.0;
    double free_flow = 0.0;  // flow with unlimited capacity

    double capacity = 0.0;  // capacity the prices below refer to
    double price1 = 0.0;
    double price2 = 0.0;
    double flow = 0.0;
    double congestion_rent = 0.0;

    /// Welfare change against autarky from per-node surplus changes...
    double gain1 = 0.0;
    double gain2 = 0.0;
    /// ...and from the area under the import/export curve.
    double gain1_area = 0.0;
    double gain2_area = 0.0;

    double marginal_cost = 0.0;
    double optimal_capacity = 0.0;  // set when solved for a marginal cost
};

/// Import curve of node 1 is D1 - S1, export curve of node 2 is S2 - D2.
/// Throws DegenerateInputError when the curves never intersect.
TwoNodeSolution solve_two_node(const LinearCurve& d1, const LinearCurve& s1, const LinearCurve& d2,
                               const LinearCurve& s2, std::variant<Capacity, MarginalCost> spec);

/// Flow from node 2 to node 1 as a function of a price at node 1 / node 2.
double import_at(const LinearCurve& d1, const LinearCurve& s1, double price);
double export_at(const LinearCurve& d2, const LinearCurve& s2, double price);

struct Situation {
    double price = 0.0;
    std::array<double, 3> cs{};
    std::array<double, 3> ps{};
    std::array<double, 3> tw{};
    double system = 0.0;
};

/// Supply-only node 1, demand-only nodes 2 and 3. In the old situation node 3
/// is cut off; in the new one all three nodes form a single market.
struct ThreeNodeSolution {
    Situation before;
    Situation after;
    std::array<double, 3> delta_tw{};
};

ThreeNodeSolution solve_three_node(const LinearCurve& s1, const LinearCurve& d2, const LinearCurve& d3);

}  // namespace tep::analytic
