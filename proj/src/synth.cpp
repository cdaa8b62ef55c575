#include "glat/synth.hpp"

#include "glat/error.hpp"
#include "glat/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <iomanip>

namespace glat {

namespace {

struct Lesion {
    int cx = 0, cy = 0, r = 0, cls = 0;
};

void validate_spec(const SynthSpec& s) {
    if (s.grid_w < 1 || s.grid_h < 1) throw ConfigError("synth: grid sizes must be >= 1");
    if (s.d < 1) throw ConfigError("synth: d must be >= 1");
    if (s.n_slides < 1) throw ConfigError("synth: n_slides must be >= 1");
    if (s.noise_scale < 0.0) throw ConfigError("synth: noise_scale must be >= 0");
    if (s.class_signal_scale <= 0.0) throw ConfigError("synth: class_signal_scale must be > 0");
    if (s.lesion_count_min < 0 || s.lesion_count_max < s.lesion_count_min)
        throw ConfigError("synth: invalid lesion count range");
    if (s.lesion_radius_min < 0 || s.lesion_radius_max < s.lesion_radius_min)
        throw ConfigError("synth: invalid lesion radius range");
    if (s.lesion_radius_max > std::max(s.grid_w, s.grid_h))
        throw ConfigError("synth: lesion radius " + std::to_string(s.lesion_radius_max) +
                          " exceeds grid " + std::to_string(s.grid_w) + "x" + std::to_string(s.grid_h));
}

/// Lesion draws always precede noise draws, so the lesion layout can be
/// recovered from a seed prefix without generating the noise.
std::vector<Lesion> draw_lesions(SplitMix64& gen, const SynthSpec& s) {
    const std::uint64_t count_range =
        static_cast<std::uint64_t>(s.lesion_count_max - s.lesion_count_min + 1);
    const std::uint64_t radius_range =
        static_cast<std::uint64_t>(s.lesion_radius_max - s.lesion_radius_min + 1);
    const int count = s.lesion_count_min + static_cast<int>(gen.below(count_range));
    std::vector<Lesion> lesions;
    lesions.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Lesion l;
        l.cx = static_cast<int>(gen.below(static_cast<std::uint64_t>(s.grid_w)));
        l.cy = static_cast<int>(gen.below(static_cast<std::uint64_t>(s.grid_h)));
        l.r = s.lesion_radius_min + static_cast<int>(gen.below(radius_range));
        l.cls = 1 + static_cast<int>(gen.below(3));
        lesions.push_back(l);
    }
    return lesions;
}

bool covers(const Lesion& l, int x, int y) {
    const int dx = x - l.cx;
    const int dy = y - l.cy;
    return dx * dx + dy * dy <= l.r * l.r;
}

int lesion_area(const Lesion& l, int grid_w, int grid_h) {
    int area = 0;
    for (int y = 0; y < grid_h; ++y)
        for (int x = 0; x < grid_w; ++x)
            if (covers(l, x, y)) ++area;
    return area;
}

std::string slide_name(int index, int n_slides) {
    int width = 4;
    for (int v = n_slides - 1; v >= 10000; v /= 10) ++width;
    std::ostringstream os;
    os << "synth-" << std::setw(width) << std::setfill('0') << index;
    return os.str();
}

}  // namespace

Vector class_signature(int cls, int d) {
    if (cls < 1 || cls >= kNumClasses) throw ConfigError("class_signature: class must be 1..3");
    if (d < 1) throw ConfigError("class_signature: d must be >= 1");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Vector sig(d);
    for (int i = 0; i < d; ++i) {
        const int bit = (i >> (cls - 1)) & 1;
        const double pattern = bit == 0 ? 1.0 : -1.0;
        sig[i] = inv_sqrt_d * (1.0 + pattern);
    }
    return sig;
}

std::vector<SynthSlide> synth_generate(const SynthSpec& spec) {
    validate_spec(spec);
    const std::uint64_t root = seeds::synth_root(spec.seed);
    std::vector<SynthSlide> slides;
    slides.reserve(static_cast<std::size_t>(spec.n_slides));
    for (int s = 0; s < spec.n_slides; ++s) {
        SplitMix64 gen(derive_seed(root, static_cast<std::uint64_t>(s)));
        const std::vector<Lesion> lesions = draw_lesions(gen, spec);

        SynthSlide slide;
        slide.table.d = spec.d;
        slide.table.slide_id = slide_name(s, spec.n_slides);
        const int patches = spec.grid_w * spec.grid_h;
        slide.table.records.reserve(static_cast<std::size_t>(patches));
        for (int id = 0; id < patches; ++id) {
            PatchRecord rec;
            rec.id = id;
            rec.x = id % spec.grid_w;
            rec.y = id / spec.grid_w;
            rec.embedding.resize(spec.d);
            for (int k = 0; k < spec.d; ++k) rec.embedding[k] = spec.noise_scale * gen.normal();
            slide.table.records.push_back(std::move(rec));
        }
        for (const Lesion& l : lesions) {
            const Vector shift = spec.class_signal_scale * class_signature(l.cls, spec.d);
            for (PatchRecord& rec : slide.table.records)
                if (covers(l, static_cast<int>(rec.x), static_cast<int>(rec.y))) rec.embedding += shift;
        }

        if (lesions.empty()) {
            slide.label.class_index = 0;
        } else {
            int best = 0;
            int best_area = -1;
            for (std::size_t i = 0; i < lesions.size(); ++i) {
                const int area = lesion_area(lesions[i], spec.grid_w, spec.grid_h);
                if (area > best_area) {
                    best_area = area;
                    best = static_cast<int>(i);
                }
            }
            slide.label.class_index = lesions[static_cast<std::size_t>(best)].cls;
        }
        slide.table.validate();
        slides.push_back(std::move(slide));
    }
    return slides;
}

std::vector<PatchId> synth_lesion_ids(const SynthSpec& spec, int slide_index) {
    validate_spec(spec);
    if (slide_index < 0 || slide_index >= spec.n_slides)
        throw ConfigError("synth_lesion_ids: slide index out of range");
    SplitMix64 gen(derive_seed(seeds::synth_root(spec.seed), static_cast<std::uint64_t>(slide_index)));
    const std::vector<Lesion> lesions = draw_lesions(gen, spec);
    std::vector<PatchId> ids;
    for (int y = 0; y < spec.grid_h; ++y) {
        for (int x = 0; x < spec.grid_w; ++x) {
            const bool hit = std::any_of(lesions.begin(), lesions.end(),
                                         [&](const Lesion& l) { return covers(l, x, y); });
            if (hit) ids.push_back(static_cast<PatchId>(y) * spec.grid_w + x);
        }
    }
    return ids;
}

}  // namespace glat
