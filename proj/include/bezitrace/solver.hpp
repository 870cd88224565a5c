#ifndef BEZITRACE_SOLVER_HPP
#define BEZITRACE_SOLVER_HPP

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bezitrace/energy.hpp"

namespace bezitrace {

struct SolverOptions {
    int max_iters = 200;
    double grad_tol = 1e-6;
    double step_tol = 1e-10;
    int history = 8;        // quasi-Newton memory
    int max_sweeps = 3;
    double sweep_rel_tol = 1e-4;
    bool global_pass = true;
    // Per-iteration cap on the inf-norm displacement; keeps shape solves
    // inside the local basin. 0 disables; the bezigon optimizer defaults
    // it to a few pixels.
    double max_step = 0.0;
};

/// Objective callback: returns the value at x and, when `grad` is
/// non-empty, fills it with the gradient. May return +inf to reject x.
using ObjectiveFn =
    std::function<double(std::span<const double>, std::span<double>)>;

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    std::string termination;
};

/// Limited-memory quasi-Newton descent with a backtracking Armijo line
/// search. Never returns a value above the starting one.
MinimizeResult minimize(const ObjectiveFn& objective, std::vector<double> x0,
                        const SolverOptions& opts);

/// Curve piece j: segments j and j+1 with the outer anchors pinned.
/// The ten free scalars are the five interior points' coordinates.
struct PieceSelector {
    int piece = 0;
    /// Global point indices (into Bezigon storage) of the free points.
    std::array<int, 5> free_points(int segment_count) const;
};

struct OptimizeReport {
    std::vector<EnergyBreakdown> trace;  // initial, then one per sweep (+global)
    int inner_iterations = 0;
    int accepted_pieces = 0;
    int rejected_pieces = 0;
    int sweeps_run = 0;
    bool global_pass_ran = false;
    std::string termination;
    DegeneracyFlags flags;
};

/// Minimizes the total energy over one piece's ten free scalars. The
/// update is kept only if the full energy (with crossings re-detected)
/// does not increase.
VectorShape optimize_piece(const VectorShape& shape, const EnergyContext& ctx,
                           const EnergyWeights& weights, int piece,
                           const SolverOptions& opts,
                           OptimizeReport* report = nullptr);

/// Overlapped piecewise sweeps followed by the optional global pass.
std::pair<VectorShape, OptimizeReport> optimize_bezigon(
    const VectorShape& shape, const EnergyContext& ctx,
    const EnergyWeights& weights, const SolverOptions& opts);

/// Closed-form least squares fill color at fixed coverage, clamped to [0,1].
/// Returns the input color when the shape covers nothing.
std::array<double, 3> optimize_color(const VectorShape& shape,
                                     const EnergyContext& ctx);

}  // namespace bezitrace

#endif
