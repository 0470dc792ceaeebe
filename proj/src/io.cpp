#include "io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace osradv {

namespace {

constexpr std::uint8_t kTagDense = 0;
constexpr std::uint8_t kTagConv2d = 1;
constexpr std::uint8_t kTagRelu = 2;
constexpr std::uint8_t kTagMaxPool2d = 3;
constexpr std::uint8_t kTagFlatten = 4;

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i)
            out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }

    void tensor(const Tensor& t) {
        u32(static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) u32(static_cast<std::uint32_t>(d));
        for (std::size_t i = 0; i < t.size(); ++i) f64(t[i]);
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& bytes, std::string origin)
        : bytes_(bytes), origin_(std::move(origin)) {}

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= std::uint64_t{bytes_[pos_++]} << (8 * i);
        return std::bit_cast<double>(bits);
    }

    Tensor tensor() {
        const std::uint32_t rank = u32();
        if (rank == 0 || rank > 8) fail("tensor rank " + std::to_string(rank));
        std::vector<std::size_t> shape(rank);
        std::size_t numel = 1;
        for (auto& d : shape) {
            d = u32();
            if (d == 0) fail("zero tensor dimension");
            numel *= d;
        }
        std::vector<double> data(numel);
        for (double& v : data) v = f64();
        return Tensor(std::move(shape), std::move(data));
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        fail_io("corrupt weight bundle " + origin_ + ": " + what + " at offset " +
                std::to_string(pos_));
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) fail("truncated record");
    }

    const std::vector<std::uint8_t>& bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) fail_io("error reading " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail_io("error writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> network_to_bytes(const Network& net) {
    ByteWriter w;
    w.u8('O');
    w.u8('S');
    w.u8('R');
    w.u8('W');
    w.u32(kWeightBundleVersion);
    w.u32(static_cast<std::uint32_t>(net.layers().size()));
    w.u32(static_cast<std::uint32_t>(net.input_shape().size()));
    for (std::size_t d : net.input_shape()) w.u32(static_cast<std::uint32_t>(d));
    for (const Layer& layer : net.layers()) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            w.u8(kTagDense);
            w.tensor(dense->weights);
            w.tensor(dense->bias);
        } else if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
            w.u8(kTagConv2d);
            w.u32(static_cast<std::uint32_t>(conv->stride));
            w.u32(static_cast<std::uint32_t>(conv->padding));
            w.tensor(conv->kernels);
            w.tensor(conv->bias);
        } else if (std::holds_alternative<ReluLayer>(layer)) {
            w.u8(kTagRelu);
        } else if (const auto* pool = std::get_if<MaxPool2dLayer>(&layer)) {
            w.u8(kTagMaxPool2d);
            w.u32(static_cast<std::uint32_t>(pool->window));
            w.u32(static_cast<std::uint32_t>(pool->stride));
        } else {
            w.u8(kTagFlatten);
        }
    }
    return w.take();
}

Network network_from_bytes(const std::vector<std::uint8_t>& bytes,
                           const std::string& origin) {
    ByteReader r(bytes, origin);
    if (r.u8() != 'O' || r.u8() != 'S' || r.u8() != 'R' || r.u8() != 'W')
        fail_io("not a weight bundle (" + origin + "): bad magic, expected OSRW");
    const std::uint32_t version = r.u32();
    if (version != kWeightBundleVersion)
        fail_io("unsupported weight bundle version " + std::to_string(version) + " in " +
                origin);
    const std::uint32_t layer_count = r.u32();
    const std::uint32_t input_rank = r.u32();
    if (input_rank == 0 || input_rank > 8) r.fail("input shape rank");
    std::vector<std::size_t> input_shape(input_rank);
    for (auto& d : input_shape) d = r.u32();

    std::vector<Layer> layers;
    layers.reserve(layer_count);
    for (std::uint32_t i = 0; i < layer_count; ++i) {
        const std::uint8_t tag = r.u8();
        switch (tag) {
            case kTagDense: {
                DenseLayer l;
                l.weights = r.tensor();
                l.bias = r.tensor();
                layers.push_back(std::move(l));
                break;
            }
            case kTagConv2d: {
                Conv2dLayer l;
                l.stride = r.u32();
                l.padding = r.u32();
                l.kernels = r.tensor();
                l.bias = r.tensor();
                layers.push_back(std::move(l));
                break;
            }
            case kTagRelu:
                layers.push_back(ReluLayer{});
                break;
            case kTagMaxPool2d: {
                MaxPool2dLayer l;
                l.window = r.u32();
                l.stride = r.u32();
                layers.push_back(std::move(l));
                break;
            }
            case kTagFlatten:
                layers.push_back(FlattenLayer{});
                break;
            default:
                r.fail("unknown layer tag " + std::to_string(tag));
        }
    }
    if (!r.exhausted()) r.fail("trailing bytes");
    return Network(std::move(layers), std::move(input_shape));
}

void save_network(const Network& net, const std::filesystem::path& path) {
    write_file(path, network_to_bytes(net));
}

Network load_network(const std::filesystem::path& path) {
    return network_from_bytes(read_file(path), path.string());
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    ByteWriter w;
    w.u8('O');
    w.u8('S');
    w.u8('R');
    w.u8('T');
    w.tensor(t);
    write_file(path, w.take());
}

Tensor load_tensor(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes, path.string());
    if (r.u8() != 'O' || r.u8() != 'S' || r.u8() != 'R' || r.u8() != 'T')
        fail_io("not a tensor file (" + path.string() + "): bad magic, expected OSRT");
    Tensor t = r.tensor();
    if (!r.exhausted()) r.fail("trailing bytes");
    return t;
}

}  // namespace osradv
