#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "network.hpp"
#include "tensor.hpp"

namespace osradv {

// Weight bundle, little-endian throughout:
//   "OSRW" | version u32 | layer count u32 | input shape [rank u32, dims u32...]
//   then per layer: kind tag u8 (0 dense, 1 conv2d, 2 relu, 3 maxpool2d,
//   4 flatten), kind hyperparameters as u32 (conv2d: stride, padding;
//   maxpool2d: window, stride), then each parameter tensor as
//   [rank u32][dims u32...][payload f64 row-major].
inline constexpr std::uint32_t kWeightBundleVersion = 1;

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

std::vector<std::uint8_t> network_to_bytes(const Network& net);
Network network_from_bytes(const std::vector<std::uint8_t>& bytes,
                           const std::string& origin = "<memory>");

// Single tensor file: "OSRT" | rank u32 | dims u32... | payload f64 LE.
void save_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace osradv
