#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>

#include "io.hpp"
#include "rng.hpp"

namespace osradv {

const char* set_label_name(SetLabel label) {
    return label == SetLabel::familiar ? "familiar" : "novel";
}

SetLabel set_label_from_name(const std::string& name) {
    if (name == "familiar") return SetLabel::familiar;
    if (name == "novel") return SetLabel::novel;
    fail_invalid("unknown set label '" + name + "' (expected familiar or novel)");
}

std::size_t Dataset::count(SetLabel label) const {
    std::size_t n = 0;
    for (const Sample& s : samples) n += (s.set_label == label) ? 1 : 0;
    return n;
}

Dataset Dataset::from_samples(std::vector<Sample> samples) {
    Dataset ds;
    ds.samples = std::move(samples);
    for (const Sample& s : ds.samples) {
        if (s.set_label == SetLabel::familiar && !s.class_label)
            fail_invalid("familiar sample '" + s.id + "' is missing its class label");
        if (s.set_label == SetLabel::novel && s.class_label)
            fail_invalid("novel sample '" + s.id + "' must not carry a class label");
        if (!ds.samples.empty() && !s.image.same_shape(ds.samples.front().image))
            fail_invalid("sample '" + s.id + "' image shape " + s.image.shape_string() +
                         " differs from the rest of the dataset");
    }
    if (ds.count(SetLabel::novel) > 0 && !ds.balanced())
        std::cerr << "warning: open-set evaluation set is unbalanced (" +
                         std::to_string(ds.count(SetLabel::familiar)) + " familiar vs " +
                         std::to_string(ds.count(SetLabel::novel)) + " novel)\n";
    return ds;
}

namespace {

struct ClassPattern {
    double angle;
    double freq;
    double phase;
    double blob_x;
    double blob_y;
    double blob_sigma;
    double wave_weight;
    double blob_weight;
};

ClassPattern class_pattern(std::uint64_t seed, std::uint32_t class_id, double side) {
    Rng rng(Rng::derive(seed, 0x1000 + class_id));
    ClassPattern p;
    p.angle = rng.uniform(0.0, std::numbers::pi);
    p.freq = rng.uniform(1.0, 3.0);
    p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.blob_x = rng.uniform(0.25, 0.75) * side;
    p.blob_y = rng.uniform(0.25, 0.75) * side;
    p.blob_sigma = rng.uniform(0.10, 0.18) * side;
    p.wave_weight = rng.uniform(0.16, 0.22);
    p.blob_weight = rng.uniform(0.28, 0.38);
    return p;
}

Tensor render_sample(const ClassPattern& p, std::uint32_t side, Rng& rng) {
    const double s = static_cast<double>(side);
    // Small per-sample jitter so classes are clusters, not single points.
    const double jx = rng.uniform(-0.06, 0.06) * s;
    const double jy = rng.uniform(-0.06, 0.06) * s;
    const double jphase = rng.uniform(-0.35, 0.35);
    const double noise = 0.06;

    Tensor img({1, side, side});
    const double ca = std::cos(p.angle), sa = std::sin(p.angle);
    for (std::uint32_t y = 0; y < side; ++y) {
        for (std::uint32_t x = 0; x < side; ++x) {
            const double u = (x * ca + y * sa) / s;
            const double wave =
                std::sin(2.0 * std::numbers::pi * p.freq * u + p.phase + jphase);
            const double dx = x - (p.blob_x + jx);
            const double dy = y - (p.blob_y + jy);
            const double blob =
                std::exp(-(dx * dx + dy * dy) / (2.0 * p.blob_sigma * p.blob_sigma));
            double v = 0.42 + p.wave_weight * wave + p.blob_weight * blob;
            v += rng.uniform(-noise, noise);
            img[y * side + x] = std::min(std::max(v, 0.0), 1.0);
        }
    }
    return img;
}

std::string sample_id(const char* prefix, std::uint32_t class_id, std::uint32_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%02u_%04u", prefix, class_id, index);
    return buf;
}

}  // namespace

SyntheticSplit make_synthetic_osr(const SyntheticSpec& spec) {
    if (spec.familiar_classes < 1 || spec.novel_classes < 1 || spec.per_class < 1 ||
        spec.image_side < 4)
        fail_invalid("synthetic dataset needs >=1 familiar/novel classes, >=1 samples "
                     "per class and image side >= 4");

    std::vector<Sample> train, test;
    const double side = static_cast<double>(spec.image_side);

    for (std::uint32_t c = 0; c < spec.familiar_classes; ++c) {
        const ClassPattern p = class_pattern(spec.seed, c, side);
        Rng rng(Rng::derive(spec.seed, 0x2000 + c));
        for (std::uint32_t i = 0; i < spec.per_class; ++i)
            train.push_back({sample_id("fam", c, i), render_sample(p, spec.image_side, rng),
                             c, SetLabel::familiar});
        for (std::uint32_t i = 0; i < spec.per_class; ++i)
            test.push_back({sample_id("fam", c, spec.per_class + i),
                            render_sample(p, spec.image_side, rng), c, SetLabel::familiar});
    }

    // Match the familiar test count exactly; spread any remainder over the
    // first novel classes to keep the evaluation set balanced.
    const std::uint32_t familiar_total = spec.familiar_classes * spec.per_class;
    const std::uint32_t base = familiar_total / spec.novel_classes;
    const std::uint32_t extra = familiar_total % spec.novel_classes;
    for (std::uint32_t c = 0; c < spec.novel_classes; ++c) {
        const std::uint32_t class_id = spec.familiar_classes + c;
        const ClassPattern p = class_pattern(spec.seed, class_id, side);
        Rng rng(Rng::derive(spec.seed, 0x2000 + class_id));
        const std::uint32_t n = base + (c < extra ? 1 : 0);
        for (std::uint32_t i = 0; i < n; ++i)
            test.push_back({sample_id("nov", c, i), render_sample(p, spec.image_side, rng),
                            std::nullopt, SetLabel::novel});
    }

    SyntheticSplit split;
    split.train = Dataset::from_samples(std::move(train));
    split.test = Dataset::from_samples(std::move(test));
    return split;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) fail_io("cannot open manifest " + manifest_path.string());
    const std::filesystem::path base = manifest_path.parent_path();

    std::vector<Sample> samples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 4)
            fail_io("manifest " + manifest_path.string() + " line " +
                    std::to_string(line_no) + ": expected 4 fields, got " +
                    std::to_string(fields.size()));

        Sample s;
        s.id = fields[0];
        std::filesystem::path tensor_path = fields[1];
        if (tensor_path.is_relative()) tensor_path = base / tensor_path;
        s.image = load_tensor(tensor_path);
        s.set_label = set_label_from_name(fields[3]);
        if (!fields[2].empty()) {
            try {
                const long v = std::stol(fields[2]);
                if (v < 0) throw std::out_of_range("negative");
                s.class_label = static_cast<std::uint32_t>(v);
            } catch (const std::exception&) {
                fail_io("manifest " + manifest_path.string() + " line " +
                        std::to_string(line_no) + ": bad class label '" + fields[2] + "'");
            }
        }
        samples.push_back(std::move(s));
    }
    if (samples.empty()) fail_io("manifest " + manifest_path.string() + " is empty");
    return Dataset::from_samples(std::move(samples));
}

std::filesystem::path save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir / "tensors", ec);
    if (ec) fail_io("cannot create " + (dir / "tensors").string() + ": " + ec.message());

    const std::filesystem::path manifest_path = dir / "manifest.csv";
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) fail_io("cannot open " + manifest_path.string() + " for writing");

    for (const Sample& s : ds.samples) {
        if (s.id.find(',') != std::string::npos || s.id.find('\n') != std::string::npos)
            fail_invalid("sample id '" + s.id + "' contains a manifest delimiter");
        const std::string rel = "tensors/" + s.id + ".osrt";
        save_tensor(s.image, dir / rel);
        out << s.id << ',' << rel << ',';
        if (s.class_label) out << *s.class_label;
        out << ',' << set_label_name(s.set_label) << '\n';
    }
    if (!out) fail_io("error writing " + manifest_path.string());
    return manifest_path;
}

}  // namespace osradv
