#ifndef BEZITRACE_DIAGNOSTICS_HPP
#define BEZITRACE_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bezitrace/energy.hpp"

namespace bezitrace {

/// Analytic-vs-central-difference verification over random bezigons.
/// The data term is held to rel. 1e-3 on at least 99% of coordinates
/// (degeneracy-flagged shapes excluded); the prior terms to rel. 1e-4.
struct GradCheckTerm {
    std::string name;
    double max_rel = 0.0;
    double fraction_bad = 0.0;  // coordinates above the threshold
    double threshold = 0.0;
    int coords_checked = 0;
    int coords_excluded = 0;
    bool pass = false;
};

struct GradCheckResult {
    std::vector<GradCheckTerm> terms;
    bool pass = false;
    nlohmann::json table;
};

GradCheckResult run_gradcheck(int trials = 100, uint64_t seed = 1,
                              int depth = 5);

/// One row of the continuity scan: the swept coordinate value, the data
/// energy under the analytic rasterizer, and under center-point sampling.
struct ScanRow {
    double value = 0.0;
    double e_wavelet = 0.0;
    double e_center = 0.0;
};

/// Sweeps one control-point coordinate of `shape` from a to b inclusive.
/// point_index addresses Bezigon storage (3j = anchor j, +1/+2 handles);
/// coord 0 = x, 1 = y.
std::vector<ScanRow> scan_energy(const VectorShape& shape,
                                 const EnergyContext& ctx, int point_index,
                                 int coord, double a, double b, int steps);

}  // namespace bezitrace

#endif
