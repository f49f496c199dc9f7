#pragma once

#include "movo/core.hpp"
#include "movo/dataio.hpp"

#include <vector>

namespace movo {

/// FAST corner: integer pixel position plus segment-test strength.
struct Corner {
    int x = 0;
    int y = 0;
    double score = 0.0;
};

/// Level 0 is full resolution; each coarser level is a 2x2 box downsample.
struct PyramidLevels {
    std::vector<GrayImage> levels;
};

struct DetectorConfig {
    int fast_threshold = 20;
    int nms_radius = 7;
    int min_features = 1500;
    int pyramid_levels = 3;
    int lk_window = 21;          // odd
    int lk_max_iterations = 30;
    double lk_epsilon = 0.01;    // px
    double fb_threshold = 1.0;   // forward-backward round-trip gate, px
};

/// Segment-test FAST (arc >= 9 of the 16-pixel circle) with greedy
/// non-maximal suppression inside nms_radius (ties: smaller row, then column).
std::vector<Corner> fast_detect(const GrayImage& img, int threshold, int nms_radius);

PyramidLevels build_pyramid(const GrayImage& img, int levels);

struct TrackedPoint {
    Point2 position;
    bool ok = false;
};

/// Pyramidal translational Lucas-Kanade, coarse to fine.
std::vector<TrackedPoint> klt_track(const PyramidLevels& prev, const PyramidLevels& curr,
                                    const std::vector<Point2>& points,
                                    const DetectorConfig& cfg = {});

/// A live feature track carried across frames by the pipeline.
struct Track {
    std::int64_t id = -1;
    Point2 position;  // location in the most recent frame
};

struct MatchResult {
    std::vector<FeatureMatch> matches;
    std::vector<Track> tracks;     // surviving + replenished, positions in curr frame
    std::int64_t next_id = 0;
};

/// Track existing features prev->curr with forward-backward verification and
/// replenish from FAST when the survivor count drops below cfg.min_features.
/// Throws InsufficientFeatures when fewer than 8 matches survive.
MatchResult match_frames(const GrayImage& prev_img, const GrayImage& curr_img,
                         const std::vector<Track>& existing_tracks, std::int64_t next_id,
                         const DetectorConfig& cfg);

}  // namespace movo
