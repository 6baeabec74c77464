#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "diffusion/epsilon_net.hpp"
#include "diffusion/schedule.hpp"
#include "gan/networks.hpp"

namespace dgp {

// On-disk layout, all integers little-endian u32:
//   "DGPT" | version | kind length | kind bytes | entry count |
//   entries: name length | name bytes | rank | dims... | f32 LE payload |
//   CRC-32 of every preceding byte
constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    std::string kind;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor& get(const std::string& name) const;
};

std::vector<unsigned char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint to_checkpoint(const EpsilonNet& net, const NoiseSchedule& schedule);
Checkpoint to_checkpoint(const Generator& g);

struct DiffusionModel {
    EpsilonNet net;
    NoiseSchedule schedule;
};

// Verify kind tag and the exact tensor set/shapes of the architecture.
DiffusionModel epsilon_net_from_checkpoint(const Checkpoint& ckpt);
Generator generator_from_checkpoint(const Checkpoint& ckpt);

}  // namespace dgp
