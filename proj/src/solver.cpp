#include "bezitrace/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace bezitrace {

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot_prod(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

MinimizeResult minimize(const ObjectiveFn& objective, std::vector<double> x0,
                        const SolverOptions& opts) {
    const size_t n = x0.size();
    MinimizeResult res;
    std::vector<double> g(n), x = std::move(x0);
    double f = objective(x, g);
    if (!std::isfinite(f)) {
        res.x = x;
        res.value = f;
        res.termination = "non-finite start";
        return res;
    }
    std::vector<double> best_x = x;
    double best_f = f;

    std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;
    std::vector<double> dir(n), x_new(n), g_new(n);

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (inf_norm(g) <= opts.grad_tol) {
            res.termination = "gradient tolerance";
            break;
        }
        // two-loop recursion
        dir.assign(g.begin(), g.end());
        std::vector<double> alpha(memory.size());
        for (size_t k = memory.size(); k-- > 0;) {
            const auto& [s, y] = memory[k];
            double rho = 1.0 / dot_prod(s, y);
            alpha[k] = rho * dot_prod(s, dir);
            for (size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y[i];
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            double gamma = dot_prod(s, y) / dot_prod(y, y);
            for (double& d : dir) d *= gamma;
        }
        for (size_t k = 0; k < memory.size(); ++k) {
            const auto& [s, y] = memory[k];
            double rho = 1.0 / dot_prod(s, y);
            double beta = rho * dot_prod(y, dir);
            for (size_t i = 0; i < n; ++i) dir[i] += s[i] * (alpha[k] - beta);
        }
        for (double& d : dir) d = -d;

        double slope = dot_prod(dir, g);
        if (!(slope < 0.0)) {  // not a descent direction: restart
            memory.clear();
            for (size_t i = 0; i < n; ++i) dir[i] = -g[i];
            slope = dot_prod(dir, g);
            if (!(slope < 0.0)) {
                res.termination = "zero gradient";
                break;
            }
        }

        double step = 1.0;
        if (memory.empty()) {
            double gn = inf_norm(g);
            step = std::min(1.0, 1.0 / std::max(gn, 1e-12));
        }
        if (opts.max_step > 0.0)
            step = std::min(step,
                            opts.max_step / std::max(inf_norm(dir), 1e-300));
        const double c1 = 1e-4;
        bool accepted = false;
        double f_new = f;
        for (int ls = 0; ls < 50; ++ls) {
            for (size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * dir[i];
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.termination = "line search failed";
            break;
        }

        std::vector<double> s(n), y(n);
        double step_norm2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            step_norm2 += s[i] * s[i];
        }
        double sy = dot_prod(s, y);
        if (sy > 1e-12 * std::sqrt(step_norm2) *
                     std::sqrt(dot_prod(y, y)) &&
            sy > 0.0) {
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > opts.history)
                memory.pop_front();
        }
        x.swap(x_new);
        g.swap(g_new);
        f = f_new;
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
        if (std::sqrt(step_norm2) <= opts.step_tol) {
            ++it;
            res.termination = "step tolerance";
            break;
        }
    }
    if (res.termination.empty()) res.termination = "max iterations";
    res.x = std::move(best_x);
    res.value = best_f;
    res.iterations = it;
    return res;
}

std::array<int, 5> PieceSelector::free_points(int segment_count) const {
    int p = ((piece % segment_count) + segment_count) % segment_count;
    int next = (p + 1) % segment_count;
    return {3 * p + 1, 3 * p + 2, 3 * next, 3 * next + 1, 3 * next + 2};
}

namespace {

bool inside_unit_square(const std::vector<Point>& pts) {
    constexpr double eps = 1e-9;
    for (const Point& p : pts)
        if (!(p.x >= -eps && p.x <= 1.0 + eps && p.y >= -eps &&
              p.y <= 1.0 + eps && std::isfinite(p.x) && std::isfinite(p.y)))
            return false;
    return true;
}

// Shared state for localized piece evaluations: coverage from the fixed
// segments, constant prior parts, and the frozen crossing set.
class PieceObjective {
  public:
    PieceObjective(const VectorShape& shape, const EnergyContext& ctx,
                   const EnergyWeights& weights, int piece)
        : shape_(shape), ctx_(ctx),
          weights_(effective_weights(weights, ctx.px_scale())) {
        int n = shape.bezigon.segment_count();
        seg_a_ = ((piece % n) + n) % n;
        seg_b_ = (seg_a_ + 1) % n;
        moving_segments_ = {seg_a_};
        if (seg_b_ != seg_a_) moving_segments_.push_back(seg_b_);
        PieceSelector sel{seg_a_};
        free_points_ = sel.free_points(n);

        // coverage contributed by the segments that stay fixed
        CoefficientSet fixed_coeffs(ctx.grid);
        CoefficientSet base_coeffs(ctx.grid);
        for (int j = 0; j < n; ++j) {
            if (j == seg_a_ || j == seg_b_) {
                accumulate_segment_coefficients(shape.bezigon.segment(j),
                                                ctx.grid, base_coeffs);
                continue;
            }
            accumulate_segment_coefficients(shape.bezigon.segment(j),
                                            ctx.grid, fixed_coeffs);
        }
        fixed_alpha_ = reconstruct(fixed_coeffs, ctx.grid).alpha;
        base_piece_alpha_ = reconstruct(base_coeffs, ctx.grid).alpha;
        owned_.assign(fixed_alpha_.size(), 0);

        // Data window: a tube around the piece's own curve. Residuals
        // further out belong to other pieces; seeing them makes a piece
        // over-reach and contort.
        int size = ctx.grid.size();
        const double tube = 6.0 / size;
        const double grace = 2.0 / size;  // shared strip at the joints
        auto sample = [&](int j, std::vector<Point>& out) {
            BezierSegment seg = shape.bezigon.segment(j);
            for (int q = 0; q <= 16; ++q) out.push_back(seg.eval(q / 16.0));
        };
        std::vector<Point> own, other;
        for (int j = 0; j < n; ++j) {
            bool moving = j == seg_a_ || j == seg_b_;
            sample(j, moving ? own : other);
        }
        auto dist_to = [](const std::vector<Point>& poly, Point c,
                          double stop) {
            double best = 1e30;
            for (size_t e = 0; e + 1 < poly.size(); ++e) {
                Point a = poly[e], d = poly[e + 1] - poly[e];
                double len2 = dot(d, d);
                double u = len2 > 0
                               ? std::clamp(dot(c - a, d) / len2, 0.0, 1.0)
                               : 0.0;
                best = std::min(best, distance(c, a + u * d));
                if (best <= stop) break;
            }
            return best;
        };
        double lo_x = 1e30, lo_y = 1e30, hi_x = -1e30, hi_y = -1e30;
        for (const Point& p : own) {
            lo_x = std::min(lo_x, p.x);
            hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_y = std::max(hi_y, p.y);
        }
        int px0 = std::clamp(
            static_cast<int>(std::floor((lo_x - tube) * size)), 0, size - 1);
        int py0 = std::clamp(
            static_cast<int>(std::floor((lo_y - tube) * size)), 0, size - 1);
        int px1 = std::clamp(
            static_cast<int>(std::ceil((hi_x + tube) * size)), 0, size - 1);
        int py1 = std::clamp(
            static_cast<int>(std::ceil((hi_y + tube) * size)), 0, size - 1);
        for (int y = py0; y <= py1; ++y)
            for (int x = px0; x <= px1; ++x) {
                if (!ctx.valid(x, y)) continue;
                Point c{(x + 0.5) / size, (y + 0.5) / size};
                double d_own = dist_to(own, c, 0.0);
                if (d_own > tube) continue;
                // residuals nearer a fixed segment belong to another piece
                if (!other.empty() &&
                    dist_to(other, c, 0.0) + grace < d_own)
                    continue;
                owned_[static_cast<size_t>(y) * size + x] = 1;
            }

        std::set<int> joints;
        for (int d : {0, 1, 2}) joints.insert(shape.bezigon.wrap(seg_a_ + d));
        affected_joints_.assign(joints.begin(), joints.end());

        apt_rest_ = 0.0;
        for (int j = 0; j < n; ++j)
            if (!joints.count(j)) apt_rest_ += joint_angle(shape.bezigon, j);
        hpt_rest_ = lpt_rest_ = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == seg_a_ || j == seg_b_) continue;
            hpt_rest_ += segment_hpt(shape.bezigon, j);
            lpt_rest_ += segment_length(shape.bezigon.segment(j));
        }
    }

    std::vector<double> initial() const {
        auto params = shape_.bezigon.to_params();
        std::vector<double> x(10);
        for (int i = 0; i < 5; ++i) {
            x[2 * i] = params[2 * free_points_[i]];
            x[2 * i + 1] = params[2 * free_points_[i] + 1];
        }
        return x;
    }

    // A piece solve is a bounded local refinement; larger rearrangements
    // belong to later sweeps and the global pass.
    double trust_radius() const { return 6.0 / ctx_.grid.size(); }

    Bezigon apply(std::span<const double> x) const {
        auto params = shape_.bezigon.to_params();
        for (int i = 0; i < 5; ++i) {
            params[2 * free_points_[i]] = x[2 * i];
            params[2 * free_points_[i] + 1] = x[2 * i + 1];
        }
        return Bezigon::from_params(params);
    }

    double operator()(std::span<const double> x, std::span<double> grad,
                      DegeneracyFlags* flags) const {
        for (double v : x)
            if (!std::isfinite(v))
                return std::numeric_limits<double>::infinity();
        auto x0 = initial();
        double r = trust_radius();
        for (int i = 0; i < 5; ++i)
            if (std::hypot(x[2 * i] - x0[2 * i], x[2 * i + 1] - x0[2 * i + 1]) >
                r)
                return std::numeric_limits<double>::infinity();
        Bezigon bz = apply(x);
        if (!inside_unit_square(bz.points()))
            return std::numeric_limits<double>::infinity();
        VectorShape cand{bz, shape_.color};

        int s = ctx_.grid.size();
        CoefficientSet piece_coeffs(ctx_.grid);
        for (int j : moving_segments_)
            accumulate_segment_coefficients(bz.segment(j), ctx_.grid,
                                            piece_coeffs);
        std::vector<double> piece_alpha =
            reconstruct(piece_coeffs, ctx_.grid).alpha;

        // A pixel counts if the piece owns it, or if the piece's own
        // coverage there deviates from its baseline (the piece always
        // answers for raster it touches, wherever it wanders).
        double scale = ctx_.data_scale();
        double e_data = 0.0;
        std::vector<double> w;
        if (!grad.empty()) w.assign(piece_alpha.size(), 0.0);
        for (size_t idx = 0; idx < piece_alpha.size(); ++idx) {
            if (!owned_[idx] &&
                std::abs(piece_alpha[idx] - base_piece_alpha_[idx]) < 1e-12)
                continue;
            int x2 = static_cast<int>(idx % s);
            int y = static_cast<int>(idx / s);
            if (!ctx_.valid(x2, y)) continue;
            double raw = piece_alpha[idx] + fixed_alpha_[idx];
            double a = std::clamp(raw, 0.0, 1.0);
            double wsum = 0.0;
            for (int c = 0; c < 3; ++c) {
                double bg = ctx_.background.at(x2, y, c);
                double r = bg + a * (cand.color[c] - bg);
                double diff = r - ctx_.input.at(x2, y, c);
                e_data += diff * diff;
                wsum += 2.0 * scale * diff * (cand.color[c] - bg);
            }
            if (!grad.empty() && raw > 0.0 && raw < 1.0) w[idx] = wsum;
        }
        e_data *= scale;

        double apt = apt_rest_;
        for (int j : affected_joints_) apt += joint_angle(bz, j, flags);
        double hpt = hpt_rest_, lpt = lpt_rest_;
        for (int j : moving_segments_) {
            hpt += segment_hpt(bz, j);
            lpt += segment_length(bz.segment(j));
        }
        std::vector<IntersectionPair> crossings;
        double spt = 0.0;
        if (weights_.spt != 0.0) {
            crossings = self_intersections(bz, ctx_.intersection_tol);
            if (!crossings.empty()) spt = e_spt_fixed(bz, crossings);
        }

        double total = e_data + weights_.apt * apt + weights_.hpt * hpt +
                       weights_.lpt * lpt + weights_.spt * spt;

        if (!grad.empty()) {
            DegeneracyFlags fl;
            std::vector<double> full =
                coverage_gradient(bz, ctx_.grid, w, &fl, &moving_segments_);
            if (flags) flags->merge(fl);
            for (int j : affected_joints_)
                detail::apt_joint_gradient(bz, j, full, weights_.apt, flags);
            for (int j : moving_segments_) {
                detail::hpt_segment_gradient(bz, j, full, weights_.hpt,
                                             flags);
                detail::lpt_segment_gradient(bz, j, full, weights_.lpt);
            }
            if (weights_.spt != 0.0 && !crossings.empty())
                detail::spt_fixed_gradient(bz, crossings, full, weights_.spt);
            for (int i = 0; i < 5; ++i) {
                grad[2 * i] = full[2 * free_points_[i]];
                grad[2 * i + 1] = full[2 * free_points_[i] + 1];
            }
        }
        return total;
    }

  private:
    static double segment_hpt(const Bezigon& bz, int j) {
        double out_len = distance(bz.handle1(j), bz.anchor(j));
        double in_len = distance(bz.anchor(j + 1), bz.handle2(j));
        return 1.0 / std::max(out_len, kEpsHandle) +
               1.0 / std::max(in_len, kEpsHandle);
    }

    const VectorShape& shape_;
    const EnergyContext& ctx_;
    const EnergyWeights weights_;
    int seg_a_, seg_b_;
    std::vector<int> moving_segments_;
    std::array<int, 5> free_points_;
    std::vector<double> fixed_alpha_;
    std::vector<int> affected_joints_;
    std::vector<uint8_t> owned_;
    std::vector<double> base_piece_alpha_;
    double apt_rest_ = 0.0, hpt_rest_ = 0.0, lpt_rest_ = 0.0;
};

}  // namespace

VectorShape optimize_piece(const VectorShape& shape, const EnergyContext& ctx,
                           const EnergyWeights& weights, int piece,
                           const SolverOptions& raw_opts,
                           OptimizeReport* report) {
    SolverOptions opts = raw_opts;
    if (opts.max_step <= 0.0) opts.max_step = 4.0 / ctx.grid.size();
    EnergyBreakdown before = total_energy(shape, ctx, weights);
    PieceObjective objective(shape, ctx, weights, piece);
    DegeneracyFlags flags;
    ObjectiveFn fn = [&](std::span<const double> x, std::span<double> g) {
        return objective(x, g, &flags);
    };
    MinimizeResult res = minimize(fn, objective.initial(), opts);
    if (report) {
        report->inner_iterations += res.iterations;
        report->flags.merge(flags);
    }
    VectorShape candidate{objective.apply(res.x), shape.color};
    if (!inside_unit_square(candidate.bezigon.points())) {
        if (report) ++report->rejected_pieces;
        return shape;
    }
    EnergyBreakdown after = total_energy(candidate, ctx, weights);
    if (after.total <= before.total) {
        if (report) ++report->accepted_pieces;
        return candidate;
    }
    if (report) ++report->rejected_pieces;
    return shape;
}

std::array<double, 3> optimize_color(const VectorShape& shape,
                                     const EnergyContext& ctx) {
    CoverageImage cov = coverage(shape.bezigon, ctx.grid);
    int s = ctx.grid.size();
    std::array<double, 3> num{0, 0, 0};
    double den = 0.0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            if (!ctx.valid(x, y)) continue;
            double a = std::clamp(cov.at(x, y), 0.0, 1.0);
            if (a == 0.0) continue;
            den += a * a;
            for (int c = 0; c < 3; ++c) {
                double bg = ctx.background.at(x, y, c);
                num[c] += a * (ctx.input.at(x, y, c) - bg + a * bg);
            }
        }
    if (den < 1e-12) return shape.color;
    std::array<double, 3> out;
    for (int c = 0; c < 3; ++c)
        out[c] = std::clamp(num[c] / den, 0.0, 1.0);
    return out;
}

namespace {

// Full-shape geometry objective for the optional global pass.
double global_objective(const VectorShape& base, const EnergyContext& ctx,
                        const EnergyWeights& raw_weights,
                        std::span<const double> x, std::span<double> grad,
                        DegeneracyFlags* flags) {
    for (double v : x)
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    Bezigon bz = Bezigon::from_params(x);
    if (!inside_unit_square(bz.points()))
        return std::numeric_limits<double>::infinity();
    EnergyWeights weights = effective_weights(raw_weights, ctx.px_scale());
    VectorShape cand{bz, base.color};
    double value = data_energy(cand, ctx);
    value += weights.apt * e_apt(bz) + weights.hpt * e_hpt(bz) +
             weights.lpt * e_lpt(bz);
    std::vector<IntersectionPair> crossings;
    if (weights.spt != 0.0) {
        crossings = self_intersections(bz, ctx.intersection_tol);
        if (!crossings.empty())
            value += weights.spt * e_spt_fixed(bz, crossings);
    }
    if (!grad.empty()) {
        DataGradient dg = data_gradient(cand, ctx);
        if (flags) flags->merge(dg.flags);
        std::vector<double> pg =
            prior_gradient(bz, weights, &crossings, flags);
        for (size_t i = 0; i < grad.size(); ++i)
            grad[i] = dg.geometry[i] + pg[i];
    }
    return value;
}

}  // namespace

std::pair<VectorShape, OptimizeReport> optimize_bezigon(
    const VectorShape& shape, const EnergyContext& ctx,
    const EnergyWeights& weights, const SolverOptions& raw_opts) {
    SolverOptions opts = raw_opts;
    if (opts.max_step <= 0.0) opts.max_step = 4.0 / ctx.grid.size();
    OptimizeReport report;
    VectorShape cur = shape;
    EnergyBreakdown eb = total_energy(cur, ctx, weights);
    report.trace.push_back(eb);

    int n = cur.bezigon.segment_count();
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        for (int p = 0; p < n; ++p)
            cur = optimize_piece(cur, ctx, weights, p, opts, &report);
        EnergyBreakdown now = total_energy(cur, ctx, weights);
        report.trace.push_back(now);
        ++report.sweeps_run;
        double drop = eb.total - now.total;
        eb = now;
        if (drop < opts.sweep_rel_tol * std::max(std::abs(eb.total), 1e-12)) {
            report.termination = "sweep converged";
            break;
        }
    }
    if (report.termination.empty()) report.termination = "max sweeps";

    if (opts.global_pass) {
        VectorShape before_global = cur;
        double before_total = eb.total;
        for (int round = 0; round < 2; ++round) {
            cur.color = optimize_color(cur, ctx);
            DegeneracyFlags flags;
            ObjectiveFn fn = [&](std::span<const double> x,
                                 std::span<double> g) {
                return global_objective(cur, ctx, weights, x, g, &flags);
            };
            MinimizeResult res =
                minimize(fn, cur.bezigon.to_params(), opts);
            report.inner_iterations += res.iterations;
            report.flags.merge(flags);
            cur.bezigon.set_params(res.x);
        }
        cur.color = optimize_color(cur, ctx);
        EnergyBreakdown now = total_energy(cur, ctx, weights);
        if (now.total <= before_total) {
            report.trace.push_back(now);
            report.global_pass_ran = true;
        } else {
            cur = before_global;  // re-detected crossings made it worse
        }
    }
    return {cur, report};
}

}  // namespace bezitrace
