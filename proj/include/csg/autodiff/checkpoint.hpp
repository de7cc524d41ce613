#ifndef CSG_AUTODIFF_CHECKPOINT_HPP_
#define CSG_AUTODIFF_CHECKPOINT_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "csg/autodiff/param_set.hpp"

CSG_NAMESPACE_BEGIN
namespace ad {

// On-disk layout:
//
//   CSGCKPT1
//   meta <key> <value>                       (zero or more)
//   param <name> <f32|f64> <d0>x<d1>... <byte offset>
//   end
//   <little-endian payload>
//
// Offsets are relative to the first payload byte. Loading converts between
// f32 and f64 payloads as needed.
inline constexpr const char* kCheckpointMagic = "CSGCKPT1";

using CheckpointMeta = std::map<std::string, std::string>;

struct Checkpoint {
  CheckpointMeta meta;
  ParamSet params;
};

void write_checkpoint(std::ostream& out, const ParamSet& params, const CheckpointMeta& meta = {});
Checkpoint read_checkpoint(std::istream& in);

// File variants throw std::runtime_error naming the path on I/O failure.
void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const CheckpointMeta& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ad
CSG_NAMESPACE_END

#endif  // CSG_AUTODIFF_CHECKPOINT_HPP_
