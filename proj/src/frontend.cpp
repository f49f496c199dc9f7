#include "movo/frontend.hpp"

#include <algorithm>
#include <cmath>

namespace movo {

namespace {

// Bresenham circle of radius 3, clockwise from 12 o'clock.
constexpr int kCircleDx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleDy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
constexpr int kMinArc = 9;

// Longest wraparound run of `flag[i]` capped at 16; returns the best
// sum of |diff| over any qualifying (length >= kMinArc) run.
double best_arc_score(const bool* flag, const double* absdiff) {
    double best = -1.0;
    for (int start = 0; start < 16; ++start) {
        if (flag[start] && flag[(start + 15) % 16]) continue;  // not a run start
        if (!flag[start]) continue;
        int len = 0;
        double sum = 0.0;
        while (len < 16 && flag[(start + len) % 16]) {
            sum += absdiff[(start + len) % 16];
            ++len;
        }
        if (len >= kMinArc) best = std::max(best, sum);
        if (len == 16) break;  // whole circle qualifies, single run
    }
    // All-16 case never enters the loop body above (no run start); handle it.
    if (best < 0.0) {
        bool all = true;
        for (int i = 0; i < 16; ++i) all = all && flag[i];
        if (all) {
            double sum = 0.0;
            for (int i = 0; i < 16; ++i) sum += absdiff[i];
            best = sum;
        }
    }
    return best;
}

}  // namespace

std::vector<Corner> fast_detect(const GrayImage& img, int threshold, int nms_radius) {
    std::vector<Corner> raw;
    for (int y = 3; y < img.height - 3; ++y) {
        for (int x = 3; x < img.width - 3; ++x) {
            const int c = img.at(x, y);
            bool bright[16], dark[16];
            double absdiff[16];
            for (int i = 0; i < 16; ++i) {
                const int p = img.at(x + kCircleDx[i], y + kCircleDy[i]);
                bright[i] = p > c + threshold;
                dark[i] = p < c - threshold;
                absdiff[i] = std::abs(p - c);
            }
            const double sb = best_arc_score(bright, absdiff);
            const double sd = best_arc_score(dark, absdiff);
            const double score = std::max(sb, sd);
            if (score >= 0.0) raw.push_back({x, y, score});
        }
    }
    // NMS: greedy by descending score, ties by smaller row then column.
    std::sort(raw.begin(), raw.end(), [](const Corner& a, const Corner& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<Corner> kept;
    const long r2 = static_cast<long>(nms_radius) * nms_radius;
    for (const Corner& c : raw) {
        bool suppressed = false;
        for (const Corner& k : kept) {
            const long dx = c.x - k.x;
            const long dy = c.y - k.y;
            if (dx * dx + dy * dy <= r2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(c);
    }
    return kept;
}

PyramidLevels build_pyramid(const GrayImage& img, int levels) {
    if (levels < 1) throw TooSmall("build_pyramid: levels must be >= 1");
    PyramidLevels pyr;
    pyr.levels.push_back(img);
    for (int l = 1; l < levels; ++l) {
        const GrayImage& src = pyr.levels.back();
        GrayImage dst;
        dst.width = src.width / 2;
        dst.height = src.height / 2;
        if (dst.width < 32 || dst.height < 32) {
            throw TooSmall("build_pyramid: level would fall below 32x32");
        }
        dst.data.resize(static_cast<size_t>(dst.width) * dst.height);
        for (int y = 0; y < dst.height; ++y) {
            for (int x = 0; x < dst.width; ++x) {
                const int sum = src.at(2 * x, 2 * y) + src.at(2 * x + 1, 2 * y) +
                                src.at(2 * x, 2 * y + 1) + src.at(2 * x + 1, 2 * y + 1);
                dst.at(x, y) = static_cast<std::uint8_t>((sum + 2) / 4);
            }
        }
        pyr.levels.push_back(std::move(dst));
    }
    return pyr;
}

namespace {

double bilinear(const GrayImage& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double ax = x - x0;
    const double ay = y - y0;
    const double v00 = img.at(x0, y0);
    const double v10 = img.at(x0 + 1, y0);
    const double v01 = img.at(x0, y0 + 1);
    const double v11 = img.at(x0 + 1, y0 + 1);
    return (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 +
           ax * ay * v11;
}

bool window_inside(const GrayImage& img, double cx, double cy, int halo) {
    return cx - halo >= 0.0 && cy - halo >= 0.0 && cx + halo < img.width - 1 &&
           cy + halo < img.height - 1;
}

}  // namespace

std::vector<TrackedPoint> klt_track(const PyramidLevels& prev, const PyramidLevels& curr,
                                    const std::vector<Point2>& points,
                                    const DetectorConfig& cfg) {
    const int half = cfg.lk_window / 2;
    const int halo = half + 2;  // central differences need one extra sample each side
    const int n_levels = static_cast<int>(prev.levels.size());
    const int win_area = cfg.lk_window * cfg.lk_window;

    std::vector<TrackedPoint> out(points.size());
    std::vector<double> tmpl(win_area), gx(win_area), gy(win_area);

    for (size_t pi = 0; pi < points.size(); ++pi) {
        double du = 0.0, dv = 0.0;  // flow at current level
        bool ok = true;
        for (int level = n_levels - 1; level >= 0 && ok; --level) {
            const GrayImage& a = prev.levels[level];
            const GrayImage& b = curr.levels[level];
            const double scale = 1.0 / static_cast<double>(1 << level);
            const double pu = points[pi].u * scale;
            const double pv = points[pi].v * scale;
            if (!window_inside(a, pu, pv, halo)) {
                // Coarse levels of small images may not fit the window at all;
                // only full resolution is a hard requirement.
                if (level == 0) {
                    ok = false;
                    break;
                }
                du *= 2.0;
                dv *= 2.0;
                continue;
            }
            // Template and its central-difference gradients from the prev image.
            double g00 = 0.0, g01 = 0.0, g11 = 0.0;
            int idx = 0;
            for (int j = -half; j <= half; ++j) {
                for (int i = -half; i <= half; ++i, ++idx) {
                    const double x = pu + i;
                    const double y = pv + j;
                    tmpl[idx] = bilinear(a, x, y);
                    gx[idx] = 0.5 * (bilinear(a, x + 1, y) - bilinear(a, x - 1, y));
                    gy[idx] = 0.5 * (bilinear(a, x, y + 1) - bilinear(a, x, y - 1));
                    g00 += gx[idx] * gx[idx];
                    g01 += gx[idx] * gy[idx];
                    g11 += gy[idx] * gy[idx];
                }
            }
            const double tr = g00 + g11;
            const double det = g00 * g11 - g01 * g01;
            const double min_eig = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
            if (min_eig < 1e-4) {
                ok = false;
                break;
            }
            const double inv = 1.0 / det;
            for (int it = 0; it < cfg.lk_max_iterations; ++it) {
                const double qu = pu + du;
                const double qv = pv + dv;
                if (!window_inside(b, qu, qv, halo)) {
                    ok = false;
                    break;
                }
                double b0 = 0.0, b1 = 0.0;
                idx = 0;
                for (int j = -half; j <= half; ++j) {
                    for (int i = -half; i <= half; ++i, ++idx) {
                        const double r = tmpl[idx] - bilinear(b, qu + i, qv + j);
                        b0 += r * gx[idx];
                        b1 += r * gy[idx];
                    }
                }
                const double su = inv * (g11 * b0 - g01 * b1);
                const double sv = inv * (-g01 * b0 + g00 * b1);
                du += su;
                dv += sv;
                if (std::hypot(du, dv) > cfg.lk_window) {
                    ok = false;  // diverged
                    break;
                }
                if (std::hypot(su, sv) < cfg.lk_epsilon) break;
            }
            if (level > 0) {
                du *= 2.0;
                dv *= 2.0;
            }
        }
        if (ok) {
            const double tu = points[pi].u + du;
            const double tv = points[pi].v + dv;
            if (tu < 0 || tv < 0 || tu >= curr.levels[0].width || tv >= curr.levels[0].height) {
                ok = false;
            } else {
                out[pi] = {{tu, tv}, true};
            }
        }
        if (!ok) out[pi] = {points[pi], false};
    }
    return out;
}

namespace {

int allowed_levels(const GrayImage& img, int requested) {
    int levels = 1;
    int w = img.width, h = img.height;
    while (levels < requested && w / 2 >= 32 && h / 2 >= 32) {
        w /= 2;
        h /= 2;
        ++levels;
    }
    return levels;
}

}  // namespace

MatchResult match_frames(const GrayImage& prev_img, const GrayImage& curr_img,
                         const std::vector<Track>& existing_tracks, std::int64_t next_id,
                         const DetectorConfig& cfg) {
    if (prev_img.width != curr_img.width || prev_img.height != curr_img.height) {
        throw Error("match_frames: frame dimensions differ");
    }
    const int levels = allowed_levels(prev_img, cfg.pyramid_levels);
    const PyramidLevels pyr_prev = build_pyramid(prev_img, levels);
    const PyramidLevels pyr_curr = build_pyramid(curr_img, levels);

    MatchResult res;
    res.next_id = next_id;

    auto track_with_fb = [&](const std::vector<Point2>& pts) {
        std::vector<TrackedPoint> fwd = klt_track(pyr_prev, pyr_curr, pts, cfg);
        std::vector<Point2> fwd_pts(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) fwd_pts[i] = fwd[i].position;
        std::vector<TrackedPoint> bwd = klt_track(pyr_curr, pyr_prev, fwd_pts, cfg);
        std::vector<bool> good(pts.size(), false);
        for (size_t i = 0; i < pts.size(); ++i) {
            if (!fwd[i].ok || !bwd[i].ok) continue;
            const double e = std::hypot(bwd[i].position.u - pts[i].u,
                                        bwd[i].position.v - pts[i].v);
            good[i] = e <= cfg.fb_threshold;
        }
        return std::make_pair(fwd, good);
    };

    std::vector<Point2> prev_pts;
    prev_pts.reserve(existing_tracks.size());
    for (const Track& t : existing_tracks) prev_pts.push_back(t.position);
    auto [fwd, good] = track_with_fb(prev_pts);
    for (size_t i = 0; i < prev_pts.size(); ++i) {
        if (!good[i]) continue;
        res.matches.push_back({prev_pts[i], fwd[i].position, existing_tracks[i].id});
        res.tracks.push_back({existing_tracks[i].id, fwd[i].position});
    }

    if (static_cast<int>(res.matches.size()) < cfg.min_features) {
        std::vector<Corner> corners = fast_detect(prev_img, cfg.fast_threshold, cfg.nms_radius);
        const long r2 = static_cast<long>(cfg.nms_radius) * cfg.nms_radius;
        std::vector<Point2> fresh;
        for (const Corner& c : corners) {
            bool near_existing = false;
            for (const FeatureMatch& m : res.matches) {
                const double dx = c.x - m.prev.u;
                const double dy = c.y - m.prev.v;
                if (dx * dx + dy * dy <= r2) {
                    near_existing = true;
                    break;
                }
            }
            if (!near_existing) fresh.push_back({static_cast<double>(c.x), static_cast<double>(c.y)});
            if (static_cast<int>(fresh.size()) + static_cast<int>(res.matches.size()) >=
                cfg.min_features) {
                break;
            }
        }
        auto [ffwd, fgood] = track_with_fb(fresh);
        for (size_t i = 0; i < fresh.size(); ++i) {
            if (!fgood[i]) continue;
            const std::int64_t id = res.next_id++;
            res.matches.push_back({fresh[i], ffwd[i].position, id});
            res.tracks.push_back({id, ffwd[i].position});
        }
    }

    if (res.matches.size() < 8) {
        throw InsufficientFeatures("match_frames: fewer than 8 surviving matches");
    }
    return res;
}

}  // namespace movo
