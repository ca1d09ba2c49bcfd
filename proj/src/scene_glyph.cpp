// SPDX-License-Identifier: Apache-2.0
#include "resinv/scene_glyph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace resinv {

namespace {

constexpr int N = geom::kImageSize;
constexpr float kPi = 3.14159265358979323846f;
constexpr float kBgAmplitude = 0.2f;

float clampf(float v, float lo, float hi) { return std::min(hi, std::max(lo, v)); }

void validate_scene(const SceneParams& s) {
    if (!(s.orientation >= 0.0f && s.orientation < kPi)) {
        throw std::invalid_argument("scene orientation outside [0, pi)");
    }
    if (!(s.intensity >= -0.45f && s.intensity <= 0.15f)) {
        throw std::invalid_argument("scene intensity outside [-0.45, 0.15]");
    }
    switch (s.family) {
        case BackgroundFamily::gradient:
            break;
        case BackgroundFamily::stripes:
            if (!(s.frequency >= 3.0f && s.frequency <= 12.0f)) {
                throw std::invalid_argument("stripe period outside [3, 12] pixels");
            }
            break;
        case BackgroundFamily::blobs: {
            const int variant = static_cast<int>(s.frequency);
            if (variant < 0 || variant > 3 || static_cast<float>(variant) != s.frequency) {
                throw std::invalid_argument("blob variant must be an integer in [0, 3]");
            }
            break;
        }
        default:
            throw std::invalid_argument("unknown background family");
    }
}

float background_value(const SceneParams& s, int row, int col) {
    const float x = static_cast<float>(col) + 0.5f;
    const float y = static_cast<float>(row) + 0.5f;
    switch (s.family) {
        case BackgroundFamily::gradient: {
            const float px = x / static_cast<float>(N) - 0.5f;
            const float py = y / static_cast<float>(N) - 0.5f;
            const float proj = px * std::cos(s.orientation) + py * std::sin(s.orientation);
            // |proj| <= sqrt(0.5); normalize so the extreme corner hits +-amplitude.
            return s.intensity + kBgAmplitude * proj / 0.70710678f;
        }
        case BackgroundFamily::stripes: {
            const float proj = x * std::cos(s.orientation) + y * std::sin(s.orientation);
            return s.intensity + kBgAmplitude * std::sin(2.0f * kPi * proj / s.frequency);
        }
        case BackgroundFamily::blobs: {
            const int variant = static_cast<int>(s.frequency);
            float g = 0.0f;
            for (int j = 0; j < 3; ++j) {
                const std::uint32_t key = static_cast<std::uint32_t>(variant * 16 + j);
                const std::uint64_t h = fnv1a64(&key, sizeof(key));
                const float cx = 2.0f + static_cast<float>(h % 1024) / 1023.0f * 12.0f;
                const float cy = 2.0f + static_cast<float>((h >> 20) % 1024) / 1023.0f * 12.0f;
                const float d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                g += std::exp(-d2 / (2.0f * 2.5f * 2.5f));
            }
            g = std::min(g, 1.0f);
            return s.intensity + kBgAmplitude * (2.0f * g - 1.0f);
        }
    }
    return 0.0f;
}

// --- glyph signed distances (pixel units, p relative to glyph center) ---

float sd_disk(float px, float py, float r) { return std::sqrt(px * px + py * py) - r; }

float sd_ring(float px, float py, float r) {
    const float len = std::sqrt(px * px + py * py);
    return std::max(len - r, 0.55f * r - len);
}

float sd_cross(float px, float py, float r) {
    const float w = std::max(0.45f, 0.35f * r);
    const float ax = std::fabs(px), ay = std::fabs(py);
    const float bar_h = std::max(ax - r, ay - w);
    const float bar_v = std::max(ay - r, ax - w);
    return std::min(bar_h, bar_v);
}

float sd_triangle(float px, float py, float r) {
    // Equilateral triangle, apex up, circumradius r.
    const float k = 1.7320508075688772f;
    const float half = r * k * 0.5f;  // half base width
    float x = std::fabs(px);
    float y = -py;  // flip so the apex points to smaller row indices
    x -= half;
    y += half / k;
    if (x + k * y > 0.0f) {
        const float nx = (x - k * y) * 0.5f;
        const float ny = (-k * x - y) * 0.5f;
        x = nx;
        y = ny;
    }
    x -= clampf(x, -2.0f * half, 0.0f);
    return -std::sqrt(x * x + y * y) * (y > 0.0f ? 1.0f : (y < 0.0f ? -1.0f : 0.0f));
}

float glyph_alpha(const IdentityParams& id, int row, int col) {
    const float cx = geom::kBoxCenter + id.dx;
    const float cy = geom::kBoxCenter + id.dy;
    const float px = static_cast<float>(col) + 0.5f - cx;
    const float py = static_cast<float>(row) + 0.5f - cy;
    float d = 0.0f;
    switch (id.kind) {
        case GlyphKind::disk: d = sd_disk(px, py, id.radius); break;
        case GlyphKind::cross: d = sd_cross(px, py, id.radius); break;
        case GlyphKind::triangle: d = sd_triangle(px, py, id.radius); break;
        case GlyphKind::ring: d = sd_ring(px, py, id.radius); break;
        default: throw std::invalid_argument("unknown glyph kind");
    }
    return clampf(0.5f - d, 0.0f, 1.0f);  // 1-px linear edge
}

void validate_identity_geometry(const IdentityParams& id) {
    if (!(id.radius > 0.5f)) throw std::invalid_argument("glyph radius too small");
    const float reach = id.radius + 0.5f + std::sqrt(id.dx * id.dx + id.dy * id.dy);
    if (reach > geom::kBoxHalf) {
        throw std::invalid_argument("glyph (radius + soft edge + offset) does not fit in the anchor box");
    }
}

// Cached alpha maps for every discrete (kind, radius, offset) triple.
const std::vector<std::vector<float>>& alpha_cache() {
    static const std::vector<std::vector<float>> cache = [] {
        std::vector<std::vector<float>> maps;
        maps.reserve(kGlyphKinds * kGlyphRadii * kGlyphOffsets);
        for (int k = 0; k < kGlyphKinds; ++k) {
            for (int r = 0; r < kGlyphRadii; ++r) {
                for (int o = 0; o < kGlyphOffsets; ++o) {
                    IdentityParams id;
                    id.kind = static_cast<GlyphKind>(k);
                    id.intensity = glyph_intensity_level(0);
                    id.radius = glyph_radius_level(r);
                    glyph_offset_level(o, &id.dx, &id.dy);
                    std::vector<float> alpha;
                    alpha.reserve((geom::kBoxHi - geom::kBoxLo) * (geom::kBoxHi - geom::kBoxLo));
                    for (int row = geom::kBoxLo; row < geom::kBoxHi; ++row) {
                        for (int col = geom::kBoxLo; col < geom::kBoxHi; ++col) {
                            alpha.push_back(glyph_alpha(id, row, col));
                        }
                    }
                    maps.push_back(std::move(alpha));
                }
            }
        }
        return maps;
    }();
    return cache;
}

const std::vector<Tensor>& scene_bank_backgrounds() {
    static const std::vector<Tensor> bank = [] {
        std::vector<Tensor> out;
        out.reserve(kSceneCount);
        for (int c = 0; c < kSceneCount; ++c) out.push_back(render_background(scene_from_code(c)).pixels);
        return out;
    }();
    return bank;
}

}  // namespace

nlohmann::json SceneParams::to_json() const {
    return nlohmann::json{{"family", static_cast<int>(family)},
                          {"orientation", orientation},
                          {"frequency", frequency},
                          {"intensity", intensity}};
}

SceneParams SceneParams::from_json(const nlohmann::json& j) {
    SceneParams s;
    s.family = static_cast<BackgroundFamily>(j.at("family").get<int>());
    s.orientation = j.at("orientation").get<float>();
    s.frequency = j.at("frequency").get<float>();
    s.intensity = j.at("intensity").get<float>();
    return s;
}

nlohmann::json IdentityParams::to_json() const {
    return nlohmann::json{{"kind", static_cast<int>(kind)},
                          {"intensity", intensity},
                          {"radius", radius},
                          {"dx", dx},
                          {"dy", dy}};
}

IdentityParams IdentityParams::from_json(const nlohmann::json& j) {
    IdentityParams p;
    p.kind = static_cast<GlyphKind>(j.at("kind").get<int>());
    p.intensity = j.at("intensity").get<float>();
    p.radius = j.at("radius").get<float>();
    p.dx = j.at("dx").get<float>();
    p.dy = j.at("dy").get<float>();
    return p;
}

float glyph_intensity_level(int idx) {
    if (idx < 0 || idx >= kGlyphIntensities) throw std::invalid_argument("glyph intensity index out of range");
    return 0.6f + 0.4f * static_cast<float>(idx) / static_cast<float>(kGlyphIntensities - 1);
}

float glyph_radius_level(int idx) {
    if (idx < 0 || idx >= kGlyphRadii) throw std::invalid_argument("glyph radius index out of range");
    return 1.3f + 0.45f * static_cast<float>(idx);
}

void glyph_offset_level(int idx, float* dx, float* dy) {
    if (idx < 0 || idx >= kGlyphOffsets) throw std::invalid_argument("glyph offset index out of range");
    *dx = 0.5f * static_cast<float>(idx % 3 - 1);
    *dy = 0.5f * static_cast<float>(idx / 3 - 1);
}

IdentityFactors identity_factors(int index) {
    if (index < 0 || index >= kIdentityCount) throw std::invalid_argument("identity index out of range");
    IdentityFactors f;
    f.offset = index % kGlyphOffsets;
    index /= kGlyphOffsets;
    f.radius = index % kGlyphRadii;
    index /= kGlyphRadii;
    f.intensity = index % kGlyphIntensities;
    f.kind = index / kGlyphIntensities;
    return f;
}

IdentityParams identity_from_index(int index) {
    const IdentityFactors f = identity_factors(index);
    IdentityParams p;
    p.kind = static_cast<GlyphKind>(f.kind);
    p.intensity = glyph_intensity_level(f.intensity);
    p.radius = glyph_radius_level(f.radius);
    glyph_offset_level(f.offset, &p.dx, &p.dy);
    return p;
}

int identity_index(const IdentityParams& p) {
    for (int i = 0; i < kIdentityCount; ++i) {
        const IdentityParams q = identity_from_index(i);
        if (q.kind == p.kind && q.intensity == p.intensity && q.radius == p.radius && q.dx == p.dx && q.dy == p.dy) {
            return i;
        }
    }
    throw std::invalid_argument("identity parameters are not a point of the discretized grid");
}

SceneParams scene_from_code(int code) {
    if (code < 0 || code >= kSceneCount) throw std::invalid_argument("scene code out of range");
    SceneParams s;
    const auto level = [](int i) { return -0.45f + 0.2f * static_cast<float>(i); };
    if (code < 32) {
        s.family = BackgroundFamily::gradient;
        s.orientation = kPi * static_cast<float>(code / 4) / 8.0f;
        s.frequency = 0.0f;
        s.intensity = level(code % 4);
    } else if (code < 128) {
        const int c = code - 32;
        s.family = BackgroundFamily::stripes;
        s.orientation = kPi * static_cast<float>(c / 12) / 8.0f;
        static const float periods[3] = {4.0f, 6.0f, 9.0f};
        s.frequency = periods[(c / 4) % 3];
        s.intensity = level(c % 4);
    } else {
        const int c = code - 128;
        s.family = BackgroundFamily::blobs;
        s.orientation = 0.0f;
        s.frequency = static_cast<float>(c / 4);
        s.intensity = level(c % 4);
    }
    return s;
}

const char* image_tag_name(ImageTag t) {
    switch (t) {
        case ImageTag::base: return "base";
        case ImageTag::swapped: return "swapped";
        case ImageTag::enhanced: return "enhanced";
        case ImageTag::reference: return "reference";
    }
    return "unknown";
}

RenderedImage render_background(const SceneParams& scene) {
    validate_scene(scene);
    RenderedImage img;
    img.pixels = Tensor::zeros({N, N});
    img.tag = ImageTag::reference;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            img.pixels.at(r, c) = clampf(background_value(scene, r, c), -1.0f, 1.0f);
        }
    }
    return img;
}

RenderedImage render(const SceneParams& scene, const IdentityParams& identity) {
    validate_identity_geometry(identity);
    RenderedImage img = render_background(scene);
    // Contrast precondition: the glyph must stand out from every background
    // value it covers.
    for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
        for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
            if (glyph_alpha(identity, r, c) > 0.0f &&
                std::fabs(identity.intensity - img.pixels.at(r, c)) < kContrastMargin) {
                throw std::invalid_argument("glyph intensity too close to the local background");
            }
        }
    }
    for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
        for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
            const float a = glyph_alpha(identity, r, c);
            const float bg = img.pixels.at(r, c);
            img.pixels.at(r, c) = clampf(bg * (1.0f - a) + identity.intensity * a, -1.0f, 1.0f);
        }
    }
    return img;
}

int fit_scene_code(const RenderedImage& image) {
    const std::vector<Tensor>& bank = scene_bank_backgrounds();
    int best = 0;
    double best_mse = exterior_mse(image.pixels, bank[0]);
    for (int c = 1; c < kSceneCount; ++c) {
        const double m = exterior_mse(image.pixels, bank[c]);
        if (m < best_mse) {
            best_mse = m;
            best = c;
        }
    }
    return best;
}

RenderedImage estimate_background(const RenderedImage& image) {
    return render_background(scene_from_code(fit_scene_code(image)));
}

RenderedImage glyph_swap(const RenderedImage& image, const IdentityParams& target, bool blur_edges) {
    if (image.pixels.shape != std::vector<int>{N, N}) {
        throw std::invalid_argument("glyph_swap: image must be " + std::to_string(N) + "x" + std::to_string(N));
    }
    validate_identity_geometry(target);
    const RenderedImage bg = estimate_background(image);
    RenderedImage out;
    out.pixels = image.pixels;
    out.tag = ImageTag::swapped;
    for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
        for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
            const float a = glyph_alpha(target, r, c);
            const float b = bg.pixels.at(r, c);
            out.pixels.at(r, c) = clampf(b * (1.0f - a) + target.intensity * a, -1.0f, 1.0f);
        }
    }
    if (blur_edges) {
        const Tensor snapshot = out.pixels;
        for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
            for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
                const bool band = r == geom::kBoxLo || r == geom::kBoxHi - 1 || c == geom::kBoxLo || c == geom::kBoxHi - 1;
                if (!band) continue;
                float acc = 0.0f;
                int cnt = 0;
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= N || cc < 0 || cc >= N) continue;
                        acc += snapshot.at(rr, cc);
                        cnt += 1;
                    }
                }
                out.pixels.at(r, c) = acc / static_cast<float>(cnt);
            }
        }
    }
    return out;
}

IdentityFit fit_identity(const RenderedImage& image) {
    const RenderedImage bg = estimate_background(image);
    const std::vector<std::vector<float>>& alphas = alpha_cache();
    constexpr int box = geom::kBoxHi - geom::kBoxLo;

    float target[box * box];
    float bgbox[box * box];
    for (int r = 0; r < box; ++r) {
        for (int c = 0; c < box; ++c) {
            target[r * box + c] = image.pixels.at(r + geom::kBoxLo, c + geom::kBoxLo);
            bgbox[r * box + c] = bg.pixels.at(r + geom::kBoxLo, c + geom::kBoxLo);
        }
    }

    IdentityFit best;
    best.index = -1;
    best.residual = 0.0f;
    for (int k = 0; k < kGlyphKinds; ++k) {
        for (int ii = 0; ii < kGlyphIntensities; ++ii) {
            const float inten = glyph_intensity_level(ii);
            for (int ri = 0; ri < kGlyphRadii; ++ri) {
                for (int oi = 0; oi < kGlyphOffsets; ++oi) {
                    const std::vector<float>& a = alphas[(k * kGlyphRadii + ri) * kGlyphOffsets + oi];
                    double acc = 0.0;
                    for (int p = 0; p < box * box; ++p) {
                        const float cand = clampf(bgbox[p] * (1.0f - a[p]) + inten * a[p], -1.0f, 1.0f);
                        const double d = static_cast<double>(target[p]) - static_cast<double>(cand);
                        acc += d * d;
                    }
                    const float mse = static_cast<float>(acc / (box * box));
                    const int index = ((k * kGlyphIntensities + ii) * kGlyphRadii + ri) * kGlyphOffsets + oi;
                    if (best.index < 0 || mse < best.residual) {
                        best.index = index;
                        best.residual = mse;
                    }
                }
            }
        }
    }
    best.params = identity_from_index(best.index);
    return best;
}

float identity_render_error(const RenderedImage& image, const IdentityParams& target) {
    validate_identity_geometry(target);
    const RenderedImage bg = estimate_background(image);
    double acc = 0.0;
    int cnt = 0;
    for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
        for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
            const float a = glyph_alpha(target, r, c);
            const float cand = clampf(bg.pixels.at(r, c) * (1.0f - a) + target.intensity * a, -1.0f, 1.0f);
            const double d = static_cast<double>(image.pixels.at(r, c)) - static_cast<double>(cand);
            acc += d * d;
            cnt += 1;
        }
    }
    return static_cast<float>(acc / cnt);
}

double exterior_mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("exterior_mse shape mismatch");
    double acc = 0.0;
    int cnt = 0;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            if (geom::in_box(r, c)) continue;
            const double d = static_cast<double>(a.at(r, c)) - static_cast<double>(b.at(r, c));
            acc += d * d;
            cnt += 1;
        }
    }
    return acc / cnt;
}

double box_mse(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("box_mse shape mismatch");
    double acc = 0.0;
    int cnt = 0;
    for (int r = geom::kBoxLo; r < geom::kBoxHi; ++r) {
        for (int c = geom::kBoxLo; c < geom::kBoxHi; ++c) {
            const double d = static_cast<double>(a.at(r, c)) - static_cast<double>(b.at(r, c));
            acc += d * d;
            cnt += 1;
        }
    }
    return acc / cnt;
}

double background_diversity(const std::vector<RenderedImage>& images) {
    if (images.size() < 2) throw std::invalid_argument("background_diversity needs at least 2 images");
    for (size_t i = 1; i < images.size(); ++i) {
        if (!images[i].pixels.same_shape(images[0].pixels)) {
            throw std::invalid_argument("background_diversity: image shape mismatch");
        }
    }
    double acc = 0.0;
    int pairs = 0;
    for (size_t i = 0; i < images.size(); ++i) {
        for (size_t j = i + 1; j < images.size(); ++j) {
            acc += exterior_mse(images[i].pixels, images[j].pixels);
            pairs += 1;
        }
    }
    return acc / pairs;
}

void write_pgm(const RenderedImage& image, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
    f << "P5\n" << N << " " << N << "\n255\n";
    for (float v : image.pixels.v) {
        const float u = clampf((v + 1.0f) * 0.5f, 0.0f, 1.0f);
        const unsigned char byte = static_cast<unsigned char>(std::lround(u * 255.0f));
        f.write(reinterpret_cast<const char*>(&byte), 1);
    }
    if (!f) throw std::runtime_error("write_pgm: short write to " + path);
}

RenderedImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    auto next_int = [&f, &path]() {
        int v;
        while (f >> std::ws && f.peek() == '#') {
            std::string line;
            std::getline(f, line);
        }
        if (!(f >> v)) throw std::runtime_error("read_pgm: malformed header in " + path);
        return v;
    };
    const int w = next_int(), h = next_int(), maxval = next_int();
    if (w != N || h != N || maxval != 255) {
        throw std::runtime_error("read_pgm: expected " + std::to_string(N) + "x" + std::to_string(N) + " maxval 255");
    }
    f.get();  // single whitespace after maxval
    RenderedImage img;
    img.pixels = Tensor::zeros({N, N});
    img.tag = ImageTag::reference;
    for (float& v : img.pixels.v) {
        const int byte = f.get();
        if (byte == EOF) throw std::runtime_error("read_pgm: truncated pixel data in " + path);
        v = static_cast<float>(byte) / 255.0f * 2.0f - 1.0f;
    }
    return img;
}

}  // namespace resinv
