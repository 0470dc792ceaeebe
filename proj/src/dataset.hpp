#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace osradv {

enum class SetLabel { familiar, novel };

const char* set_label_name(SetLabel label);  // "familiar" / "novel"
SetLabel set_label_from_name(const std::string& name);

struct Sample {
    std::string id;
    Tensor image;
    std::optional<std::uint32_t> class_label;  // present iff familiar
    SetLabel set_label = SetLabel::familiar;
};

struct Dataset {
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    std::size_t count(SetLabel label) const;
    bool balanced() const { return count(SetLabel::familiar) == count(SetLabel::novel); }

    // Checks the per-sample label invariants (familiar carries a class
    // label, novel does not; images share one shape) and, for sets that
    // contain novel samples, warns on stderr when familiar/novel counts
    // differ.
    static Dataset from_samples(std::vector<Sample> samples);
};

struct SyntheticSpec {
    std::uint32_t familiar_classes = 5;
    std::uint32_t novel_classes = 5;
    std::uint32_t per_class = 40;  // train images per familiar class; also
                                   // the familiar test count per class
    std::uint32_t image_side = 8;
    std::uint64_t seed = 1;
};

struct SyntheticSplit {
    Dataset train;  // familiar classes only
    Dataset test;   // balanced familiar/novel
};

// Procedural open-set stand-in: every class is a distinct oriented grating
// plus a Gaussian blob, with per-sample noise and jitter. Familiar classes
// appear in train and test; novel classes only in test. Deterministic in
// the seed, byte-for-byte.
SyntheticSplit make_synthetic_osr(const SyntheticSpec& spec);

// Manifest: one record per line, `sample_id,tensor_path,class_label,set_label`
// with class_label empty for novel samples. tensor_path is resolved relative
// to the manifest's directory. Tensors use the OSRT format.
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Writes <dir>/manifest.csv plus one OSRT file per sample under
// <dir>/tensors/. Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace osradv
