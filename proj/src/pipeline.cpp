#include "bezitrace/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "bezitrace/imaging.hpp"

namespace bezitrace {

PaddedImage pad_to_grid(const RasterImage& input, int depth) {
    if (input.width < 1 || input.height < 1 || input.channels < 1)
        throw std::invalid_argument("empty input image");
    if (depth < 0) {
        int longest = std::max(input.width, input.height);
        depth = 0;
        while ((1 << depth) < longest) ++depth;
        depth = std::max(depth, 1);
    }
    if (depth > kMaxGridDepth)
        throw std::invalid_argument("image too large for the grid depth cap");
    int s = 1 << depth;
    if (s < std::max(input.width, input.height))
        throw std::invalid_argument("requested depth is too small");

    PaddedImage out;
    out.grid = RasterGrid{depth};
    out.orig_width = input.width;
    out.orig_height = input.height;
    out.image = RasterImage(s, s, 3);
    out.mask.assign(static_cast<size_t>(s) * s, 0);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            int sx = std::min(x, input.width - 1);
            int sy = std::min(y, input.height - 1);
            auto rgb = input.rgb(sx, sy);
            for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = rgb[c];
            if (x < input.width && y < input.height)
                out.mask[static_cast<size_t>(y) * s + x] = 1;
        }
    return out;
}

Bezigon scale_bezigon(const Bezigon& bezigon, double factor) {
    auto params = bezigon.to_params();
    for (double& v : params) v *= factor;
    return Bezigon::from_params(params);
}

RasterImage render_document(const VectorDocument& doc, int out_w, int out_h,
                            std::array<double, 3> page_background,
                            int oracle_samples) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("output size must be positive");
    int depth = 0;
    while ((1 << depth) < std::max(out_w, out_h)) ++depth;
    depth = std::max(depth, 1);
    if (depth > kMaxGridDepth)
        throw std::invalid_argument("output too large for the grid depth cap");
    RasterGrid grid{depth};
    int s = grid.size();

    // document canvas -> padded unit square
    double scale_px =
        std::max(doc.width, doc.height) > 0
            ? std::max(out_w, out_h) / std::max(doc.width, doc.height)
            : 1.0;

    RasterImage canvas(s, s, 3);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < 3; ++c)
                canvas.at(x, y, c) = page_background[c];

    for (const VectorShape& shape : doc.shapes) {
        VectorShape scaled{
            scale_bezigon(shape.bezigon, scale_px / s).normalized_orientation(),
            shape.color};
        canvas = oracle_samples > 0
                     ? oracle_rasterize(scaled, canvas, grid, oracle_samples)
                     : rasterize(scaled, canvas, grid);
    }

    RasterImage out(out_w, out_h, 3);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = canvas.at(x, y, c);
    return out;
}

int worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BEZITRACE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

EnergyContext make_shape_context(const PaddedImage& padded,
                                 const VectorShape& initial_normalized,
                                 const std::optional<std::array<double, 3>>&
                                     background_override,
                                 bool use_l0) {
    EnergyContext ctx;
    ctx.grid = padded.grid;
    ctx.input = padded.image;
    ctx.mask = padded.mask;
    ctx.use_l0 = use_l0;
    ctx.l0 = std::max(e_lpt(initial_normalized.bezigon), 1e-6);

    int s = padded.grid.size();
    std::array<double, 3> bg{1.0, 1.0, 1.0};
    if (background_override) {
        bg = *background_override;
    } else {
        // mean color outside a 2 px dilation of the initial coverage
        CoverageImage cov = coverage(initial_normalized.bezigon, padded.grid);
        std::vector<uint8_t> inside(cov.alpha.size(), 0);
        for (size_t i = 0; i < cov.alpha.size(); ++i)
            inside[i] = std::abs(cov.alpha[i]) > 1e-6 ? 1 : 0;
        std::vector<uint8_t> dilated = inside;
        for (int pass = 0; pass < 2; ++pass) {
            std::vector<uint8_t> next = dilated;
            for (int y = 0; y < s; ++y)
                for (int x = 0; x < s; ++x) {
                    if (dilated[static_cast<size_t>(y) * s + x]) continue;
                    bool near = false;
                    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1},
                                          {0, -1}})
                        if (x + dx >= 0 && x + dx < s && y + dy >= 0 &&
                            y + dy < s &&
                            dilated[static_cast<size_t>(y + dy) * s + x + dx])
                            near = true;
                    if (near) next[static_cast<size_t>(y) * s + x] = 1;
                }
            dilated.swap(next);
        }
        double count = 0;
        std::array<double, 3> acc{0, 0, 0};
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                size_t i = static_cast<size_t>(y) * s + x;
                if (!padded.mask.empty() && !padded.mask[i]) continue;
                if (dilated[i]) continue;
                count += 1.0;
                for (int c = 0; c < 3; ++c) acc[c] += padded.image.at(x, y, c);
            }
        if (count > 0)
            for (int c = 0; c < 3; ++c) bg[c] = acc[c] / count;
    }
    ctx.background = RasterImage(s, s, 3);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < 3; ++c) ctx.background.at(x, y, c) = bg[c];
    return ctx;
}

namespace {

std::array<double, 3> initial_color(const VectorShape& normalized,
                                    const PaddedImage& padded,
                                    std::array<double, 3> fallback) {
    CoverageImage cov = coverage(normalized.bezigon, padded.grid);
    int s = padded.grid.size();
    std::array<double, 3> acc{0, 0, 0};
    double count = 0;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            size_t i = static_cast<size_t>(y) * s + x;
            if (!padded.mask.empty() && !padded.mask[i]) continue;
            if (cov.alpha[i] <= 0.9) continue;
            count += 1.0;
            auto rgb = padded.image.rgb(x, y);
            for (int c = 0; c < 3; ++c) acc[c] += rgb[c];
        }
    if (count < 1.0) return fallback;
    for (int c = 0; c < 3; ++c) acc[c] /= count;
    return acc;
}

}  // namespace

VectorizeResult vectorize_image(const RasterImage& input,
                                const VectorizeConfig& cfg,
                                const VectorDocument* seed) {
    auto t0 = std::chrono::steady_clock::now();
    PaddedImage padded = pad_to_grid(input, cfg.depth);
    int s = padded.grid.size();

    // starting shapes, pixel units, back-to-front
    std::vector<VectorShape> start_px;
    std::vector<int> region_ids;
    if (seed) {
        double factor = seed->width > 0
                            ? input.width / seed->width
                            : 1.0;
        int id = 0;
        for (const VectorShape& sh : seed->shapes) {
            start_px.push_back(
                {scale_bezigon(sh.bezigon, factor).normalized_orientation(),
                 sh.color});
            region_ids.push_back(id++);
        }
    } else {
        for (InitShape& ish : initialize(input, cfg.init)) {
            start_px.push_back({std::move(ish.bezigon), ish.color});
            region_ids.push_back(ish.region);
        }
    }

    // page background: valid pixels outside every starting shape
    std::vector<uint8_t> covered(static_cast<size_t>(s) * s, 0);
    std::vector<VectorShape> start_norm;
    for (const VectorShape& sh : start_px) {
        VectorShape norm{scale_bezigon(sh.bezigon, 1.0 / s), sh.color};
        CoverageImage cov = coverage(norm.bezigon, padded.grid);
        for (size_t i = 0; i < cov.alpha.size(); ++i)
            if (std::abs(cov.alpha[i]) > 1e-6) covered[i] = 1;
        start_norm.push_back(std::move(norm));
    }
    std::array<double, 3> page_bg{1, 1, 1};
    {
        std::array<double, 3> acc{0, 0, 0};
        double count = 0;
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x) {
                size_t i = static_cast<size_t>(y) * s + x;
                if (!padded.mask[i] || covered[i]) continue;
                count += 1;
                for (int c = 0; c < 3; ++c) acc[c] += padded.image.at(x, y, c);
            }
        if (cfg.background)
            page_bg = *cfg.background;
        else if (count > 0)
            for (int c = 0; c < 3; ++c) page_bg[c] = acc[c] / count;
    }

    struct ShapeOutcome {
        VectorShape shape{Bezigon{std::vector<Point>(6)}, {0, 0, 0}};
        OptimizeReport report;
        double seconds = 0.0;
    };
    std::vector<ShapeOutcome> outcomes(start_norm.size());

    std::atomic<size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= start_norm.size()) return;
            auto ts = std::chrono::steady_clock::now();
            VectorShape initial = start_norm[i];
            EnergyContext ctx = make_shape_context(padded, initial,
                                                   cfg.background, cfg.use_l0);
            initial.color = initial_color(initial, padded, initial.color);
            auto [optimized, report] =
                optimize_bezigon(initial, ctx, cfg.weights, cfg.solver);
            outcomes[i].shape = optimized;
            outcomes[i].report = std::move(report);
            outcomes[i].seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              ts)
                    .count();
        }
    };
    int workers = std::min<int>(worker_count(cfg.threads),
                                std::max<size_t>(start_norm.size(), 1));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    VectorizeResult result;
    result.page_background = page_bg;
    result.document.width = input.width;
    result.document.height = input.height;
    VectorDocument before_doc;
    before_doc.width = input.width;
    before_doc.height = input.height;
    for (size_t i = 0; i < outcomes.size(); ++i) {
        result.document.shapes.push_back(
            {scale_bezigon(outcomes[i].shape.bezigon, s),
             outcomes[i].shape.color});
        before_doc.shapes.push_back(
            {scale_bezigon(start_norm[i].bezigon, s), start_norm[i].color});
    }

    RasterImage in3(input.width, input.height, 3);
    for (int y = 0; y < input.height; ++y)
        for (int x = 0; x < input.width; ++x) {
            auto rgb = input.rgb(x, y);
            for (int c = 0; c < 3; ++c) in3.at(x, y, c) = rgb[c];
        }
    RasterImage before_img =
        render_document(before_doc, input.width, input.height, page_bg);
    RasterImage after_img = render_document(result.document, input.width,
                                            input.height, page_bg);
    result.psnr_before = psnr(before_img, in3);
    result.psnr_after = psnr(after_img, in3);

    nlohmann::json shapes_json = nlohmann::json::array();
    for (size_t i = 0; i < outcomes.size(); ++i) {
        const OptimizeReport& rep = outcomes[i].report;
        nlohmann::json trace = nlohmann::json::array();
        for (const EnergyBreakdown& eb : rep.trace)
            trace.push_back({{"e_data", eb.e_data},
                             {"e_spt", eb.e_spt},
                             {"e_apt", eb.e_apt},
                             {"e_hpt", eb.e_hpt},
                             {"e_lpt", eb.e_lpt},
                             {"total", eb.total}});
        shapes_json.push_back(
            {{"region", region_ids[i]},
             {"segments", outcomes[i].shape.bezigon.segment_count()},
             {"color", outcomes[i].shape.color},
             {"trace", trace},
             {"sweeps", rep.sweeps_run},
             {"inner_iterations", rep.inner_iterations},
             {"accepted_pieces", rep.accepted_pieces},
             {"rejected_pieces", rep.rejected_pieces},
             {"global_pass", rep.global_pass_ran},
             {"termination", rep.termination},
             {"degeneracies",
              {{"tangent_skips", rep.flags.tangent_skips},
               {"zero_cubics", rep.flags.zero_cubics},
               {"short_handles", rep.flags.short_handles}}},
             {"seconds", outcomes[i].seconds}});
    }
    result.report = {
        {"schema_version", 1},
        {"grid_depth", padded.grid.depth},
        {"canvas", {{"width", input.width}, {"height", input.height}}},
        {"units", "px"},
        {"page_background", page_bg},
        {"psnr_before_db", result.psnr_before},
        {"psnr_after_db", result.psnr_after},
        {"shapes", shapes_json},
        {"seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
             .count()}};
    return result;
}

}  // namespace bezitrace
