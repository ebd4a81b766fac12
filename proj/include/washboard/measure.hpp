#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "washboard/propagate.hpp"
#include "washboard/stationary.hpp"

namespace washboard {

// Population split of a final state: qubit pair plus a three-way
// leakage decomposition. Sum rules: P_g+P_e+P_L = 1 and
// P_L = leak_intra + leak_inter + leak_absorbed, each within 1e-6.
struct PopulationReport {
    double p_g = 0;
    double p_e = 0;
    double p_l = 0;
    double leak_intra = 0;     // central-well states of rank >= 2
    double leak_inter = 0;     // other wells' localized states + residual
    double leak_absorbed = 0;  // probability removed by the absorber
};

inline PopulationReport measure(const PropagationResult& result, const StateBasis& basis) {
    const WaveState& psi = result.final_state;
    if (psi.grid.get() != basis.grid.get())
        throw std::invalid_argument("measure: state and basis use different grids");

    PopulationReport rep;
    rep.leak_absorbed = std::max(0.0, result.absorbed_norm);
    double projected = 0;
    for (std::size_t i = 0; i < basis.states.size(); ++i) {
        const double p = std::norm(inner_product(basis.states[i].wf, psi));
        projected += p;
        if (i == basis.qubit_ground) {
            rep.p_g = p;
        } else if (i == basis.qubit_excited) {
            rep.p_e = p;
        } else if (basis.states[i].well_index == 0) {
            rep.leak_intra += p;
        } else {
            rep.leak_inter += p;
        }
    }
    // anything not captured by a localized basis state has left the central
    // well's bound spectrum; attribute it to inter-well leakage
    const double residual = std::max(0.0, 1.0 - rep.leak_absorbed - projected);
    rep.leak_inter += residual;
    rep.p_l = std::max(0.0, 1.0 - rep.p_g - rep.p_e);
    // projections of a unit state can overshoot 1 by a few ulp; keep honest probabilities
    for (double* v : {&rep.p_g, &rep.p_e, &rep.p_l, &rep.leak_intra, &rep.leak_inter})
        *v = std::clamp(*v, 0.0, 1.0);
    return rep;
}

// B = P_e / P_L; +infinity sentinel below the projection-noise floor.
inline double branching_ratio(const PopulationReport& rep) {
    if (rep.p_l < 1e-10) return std::numeric_limits<double>::infinity();
    return rep.p_e / rep.p_l;
}

}
