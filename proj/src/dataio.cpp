#include "movo/dataio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace movo {

namespace fs = std::filesystem;

std::string frame_stem(int frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", frame);
    return buf;
}

fs::path SequenceSource::image_path(int frame) const {
    return image_dir / (frame_stem(frame) + ".pgm");
}

fs::path SequenceSource::depth_path(int frame) const {
    if (!depth_dir) return {};
    return *depth_dir / (frame_stem(frame) + ".pfm");
}

CameraIntrinsics load_kitti_calib(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calib file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("P0:", 0) != 0) continue;
        std::istringstream ss(line.substr(3));
        double p[12];
        for (double& v : p) {
            if (!(ss >> v)) throw ParseError("calib P0 line needs 12 numbers: " + path.string());
        }
        double extra;
        if (ss >> extra) throw ParseError("calib P0 line has more than 12 numbers: " + path.string());
        CameraIntrinsics k{p[0], p[5], p[2], p[6]};
        if (!k.valid()) throw ParseError("calib P0 has non-positive focal length: " + path.string());
        return k;
    }
    throw ParseError("no P0 line in calib file: " + path.string());
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comment lines.
std::string pnm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw ParseError("truncated PNM header");
    return tok;
}

int pnm_int(std::istream& in) {
    const std::string tok = pnm_token(in);
    try {
        size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw ParseError("bad PNM integer: " + tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad PNM integer: " + tok);
    }
}

}  // namespace

GrayImage load_pgm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PGM: " + path.string());
    if (pnm_token(in) != "P5") throw ParseError("not a binary PGM (P5): " + path.string());
    GrayImage img;
    img.width = pnm_int(in);
    img.height = pnm_int(in);
    const int maxval = pnm_int(in);
    if (img.width <= 0 || img.height <= 0) throw ParseError("bad PGM dimensions: " + path.string());
    if (maxval <= 0 || maxval > 255) throw ParseError("PGM maxval must be <= 255: " + path.string());
    img.data.resize(static_cast<size_t>(img.width) * img.height);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
        throw ParseError("truncated PGM payload: " + path.string());
    }
    return img;
}

void save_pgm(const GrayImage& img, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write PGM: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw IoError("short write to PGM: " + path.string());
}

DepthMap load_pfm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PFM: " + path.string());
    const std::string magic = pnm_token(in);
    if (magic != "Pf") throw ParseError("not a grayscale PFM (Pf): " + path.string());
    DepthMap map;
    map.width = pnm_int(in);
    map.height = pnm_int(in);
    if (map.width <= 0 || map.height <= 0) throw ParseError("bad PFM dimensions: " + path.string());
    double scale = 0.0;
    try {
        scale = std::stod(pnm_token(in));
    } catch (const std::exception&) {
        throw ParseError("bad PFM scale line: " + path.string());
    }
    if (scale == 0.0) throw ParseError("PFM scale must be nonzero: " + path.string());
    const bool file_little = scale < 0.0;

    const size_t n = static_cast<size_t>(map.width) * map.height;
    std::vector<float> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(float))) {
        throw ParseError("truncated PFM payload: " + path.string());
    }
    if (file_little != (std::endian::native == std::endian::little)) {
        for (float& f : raw) {
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            u = __builtin_bswap32(u);
            std::memcpy(&f, &u, 4);
        }
    }
    // PFM stores rows bottom-to-top; flip to top-to-bottom and sanitize.
    map.data.resize(n);
    for (int y = 0; y < map.height; ++y) {
        const float* src = raw.data() + static_cast<size_t>(map.height - 1 - y) * map.width;
        float* dst = map.data.data() + static_cast<size_t>(y) * map.width;
        for (int x = 0; x < map.width; ++x) {
            const float v = src[x];
            dst[x] = std::isfinite(v) ? v : 0.0f;
        }
    }
    return map;
}

void save_pfm(const DepthMap& map, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write PFM: " + path.string());
    const double scale = (std::endian::native == std::endian::little) ? -1.0 : 1.0;
    out << "Pf\n" << map.width << " " << map.height << "\n" << scale << "\n";
    for (int y = map.height - 1; y >= 0; --y) {
        out.write(reinterpret_cast<const char*>(map.data.data() + static_cast<size_t>(y) * map.width),
                  static_cast<std::streamsize>(map.width * sizeof(float)));
    }
    if (!out) throw IoError("short write to PFM: " + path.string());
}

void write_kitti_poses(const Trajectory& traj, const fs::path& path) {
    if (traj.empty()) throw IoError("refusing to write empty trajectory: " + path.string());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write pose file: " + path.string());
    char buf[32];
    for (const auto& [frame, pose] : traj.poses) {
        (void)frame;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 4; ++c) {
                const double v = (c < 3) ? pose.rotation(r, c) : pose.translation(r);
                // 12 decimals so poses round-trip well below the 1e-9 contract.
                std::snprintf(buf, sizeof(buf), "%.12e", v);
                if (r != 0 || c != 0) out << ' ';
                out << buf;
            }
        }
        out << '\n';
    }
    if (!out) throw IoError("short write to pose file: " + path.string());
}

Trajectory read_kitti_poses(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pose file: " + path.string());
    Trajectory traj;
    std::string line;
    int frame = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        double v[12];
        for (double& x : v) {
            if (!(ss >> x)) throw ParseError("pose line needs 12 floats: " + path.string());
        }
        double extra;
        if (ss >> extra) throw ParseError("pose line has more than 12 floats: " + path.string());
        Pose p;
        p.rotation << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
        p.translation << v[3], v[7], v[11];
        p.rotation = orthonormalize(p.rotation);
        traj.poses.emplace_back(frame++, p);
    }
    return traj;
}

SequenceSource open_sequence(const fs::path& root, const std::string& seq,
                             const std::optional<fs::path>& depth_root) {
    SequenceSource src;
    const fs::path seq_dir = root / "sequences" / seq;
    src.image_dir = seq_dir / "image_0";
    if (!fs::is_directory(src.image_dir)) {
        throw IoError("missing image directory: " + src.image_dir.string());
    }
    src.calib = load_kitti_calib(seq_dir / "calib.txt");
    int n = 0;
    while (fs::exists(src.image_dir / (frame_stem(n) + ".pgm"))) ++n;
    if (n == 0) throw IoError("no frames found in: " + src.image_dir.string());
    src.frame_count = n;
    const fs::path gt = root / "poses" / (seq + ".txt");
    if (fs::exists(gt)) src.ground_truth = read_kitti_poses(gt);
    if (depth_root) {
        const fs::path dd = *depth_root / seq;
        if (fs::is_directory(dd)) src.depth_dir = dd;
    }
    return src;
}

}  // namespace movo
