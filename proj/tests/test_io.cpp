#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "dataset.hpp"
#include "io.hpp"
#include "support/test_support.hpp"

using namespace osradv;
using namespace testsupport;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* name) {
    const fs::path dir = fs::temp_directory_path() / "osradv_io_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void push_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void push_f64(std::vector<std::uint8_t>& v, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    for (int i = 0; i < 8; ++i) v.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

}  // namespace

TEST_CASE("weight bundle: golden bytes for a tiny dense net") {
    DenseLayer dense{Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2}, {5, 6})};
    const Network net({dense}, {2});

    std::vector<std::uint8_t> want{'O', 'S', 'R', 'W'};
    push_u32(want, 1);  // format version
    push_u32(want, 1);  // layer count
    push_u32(want, 1);  // input shape rank
    push_u32(want, 2);  // input dim
    want.push_back(0);  // dense tag
    push_u32(want, 2);  // weights rank
    push_u32(want, 2);
    push_u32(want, 2);
    for (double v : {1.0, 2.0, 3.0, 4.0}) push_f64(want, v);
    push_u32(want, 1);  // bias rank
    push_u32(want, 2);
    for (double v : {5.0, 6.0}) push_f64(want, v);

    CHECK(network_to_bytes(net) == want);
}

TEST_CASE("weight bundle: save/load/save is byte-identical and behavior-preserving") {
    Rng rng(606);
    const fs::path dir = temp_dir("bundle");
    for (int trial = 0; trial < 10; ++trial) {
        const Network net = random_toy_net(rng, 6, 3);
        const fs::path path = dir / ("net" + std::to_string(trial) + ".osrw");
        save_network(net, path);
        const Network loaded = load_network(path);

        CHECK(network_to_bytes(net) == network_to_bytes(loaded));
        CHECK(loaded.input_shape() == net.input_shape());
        CHECK(loaded.num_classes() == net.num_classes());

        const Tensor x = random_tensor({1, 6, 6}, rng);
        const Tensor a = net.forward(x);
        const Tensor b = loaded.forward(x);
        CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("weight bundle: corrupt files fail with io errors") {
    const fs::path dir = temp_dir("corrupt");

    const fs::path missing = dir / "missing.osrw";
    CHECK_THROWS_AS(load_network(missing), Error);

    const fs::path bad_magic = dir / "bad_magic.osrw";
    std::ofstream(bad_magic, std::ios::binary) << "NOPE" << std::string(16, '\0');
    CHECK_THROWS_WITH_AS(load_network(bad_magic), doctest::Contains("magic"), Error);

    DenseLayer dense{Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2}, {5, 6})};
    const Network net({dense}, {2});
    auto bytes = network_to_bytes(net);
    bytes.resize(bytes.size() - 7);  // truncate mid-payload
    const fs::path truncated = dir / "trunc.osrw";
    std::ofstream(truncated, std::ios::binary)
        .write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    CHECK_THROWS_AS(load_network(truncated), Error);
}

TEST_CASE("tensor file: golden header and round trip") {
    const fs::path dir = temp_dir("tensor");
    const Tensor t({2, 2}, {0.25, -1.5, 3.0, 0.0});
    const fs::path path = dir / "t.osrt";
    save_tensor(t, path);

    std::ifstream in(path, std::ios::binary);
    std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
    std::vector<std::uint8_t> want{'O', 'S', 'R', 'T'};
    push_u32(want, 2);
    push_u32(want, 2);
    push_u32(want, 2);
    for (double v : {0.25, -1.5, 3.0, 0.0}) push_f64(want, v);
    CHECK(raw == want);

    const Tensor back = load_tensor(path);
    CHECK(back.shape() == t.shape());
    CHECK(std::memcmp(back.data(), t.data(), t.size() * sizeof(double)) == 0);
}

TEST_CASE("dataset: manifest save/load round trip") {
    const fs::path dir = temp_dir("manifest");
    SyntheticSpec spec;
    spec.familiar_classes = 2;
    spec.novel_classes = 2;
    spec.per_class = 3;
    spec.image_side = 5;
    spec.seed = 99;
    const SyntheticSplit split = make_synthetic_osr(spec);

    save_dataset(split.test, dir);
    const Dataset loaded = load_dataset(dir / "manifest.csv");

    REQUIRE(loaded.size() == split.test.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        const Sample& a = split.test.samples[i];
        const Sample& b = loaded.samples[i];
        CHECK(a.id == b.id);
        CHECK(a.set_label == b.set_label);
        CHECK(a.class_label == b.class_label);
        CHECK(a.image.shape() == b.image.shape());
        CHECK(std::memcmp(a.image.data(), b.image.data(),
                          a.image.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("dataset: manifest errors") {
    const fs::path dir = temp_dir("manifest_bad");

    std::ofstream(dir / "short.csv") << "id1,tensors/x.osrt,0\n";
    CHECK_THROWS_WITH_AS(load_dataset(dir / "short.csv"), doctest::Contains("4 fields"),
                         Error);

    std::ofstream(dir / "missing_tensor.csv") << "id1,tensors/x.osrt,0,familiar\n";
    CHECK_THROWS_AS(load_dataset(dir / "missing_tensor.csv"), Error);

    save_tensor(Tensor({1, 2, 2}), dir / "img.osrt");
    std::ofstream(dir / "bad_label.csv") << "id1,img.osrt,zero,familiar\n";
    CHECK_THROWS_AS(load_dataset(dir / "bad_label.csv"), Error);

    std::ofstream(dir / "novel_with_label.csv") << "id1,img.osrt,3,novel\n";
    CHECK_THROWS_AS(load_dataset(dir / "novel_with_label.csv"), Error);

    std::ofstream(dir / "familiar_unlabelled.csv") << "id1,img.osrt,,familiar\n";
    CHECK_THROWS_AS(load_dataset(dir / "familiar_unlabelled.csv"), Error);

    CHECK_THROWS_AS(load_dataset(dir / "does_not_exist.csv"), Error);
}
