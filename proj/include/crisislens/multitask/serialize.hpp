#pragma once

#include <filesystem>
#include <string>

#include "crisislens/multitask/model.hpp"

namespace crisislens::multitask {

inline constexpr char kModelMagic[4] = {'C', 'L', 'N', '1'};

/// "CLN1", a length-prefixed JSON block (config, vocabulary, lexicon, BPRM
/// incumbent), then the named tensors: name length, name, rank, dims and
/// little-endian 64-bit values. Gates travel as a tensor so they stay exact.
std::string serialize_model(const TrainedModel& m);
TrainedModel deserialize_model(const std::string& bytes);

void save_model(const TrainedModel& m, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace crisislens::multitask
