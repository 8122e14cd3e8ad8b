#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrfmoco/encoding.hpp"
#include "mrfmoco/matching.hpp"
#include "mrfmoco/navigator.hpp"
#include "mrfmoco/sequence.hpp"
#include "mrfmoco/types.hpp"
#include "mrfmoco/warp.hpp"

namespace mrfmoco {

// All binary formats are little-endian with a 4-byte magic; see
// docs/formats.md. Floating point payloads are stored as f32.

// .qmap: real or complex voxel raster with spacing.
void write_qmap(const std::string &path, const RealVolume &v);
void write_qmap(const std::string &path, const Volume3D &v);
bool qmap_is_complex(const std::string &path);
RealVolume read_qmap_real(const std::string &path);
Volume3D read_qmap_complex(const std::string &path);
void write_qmap(const std::string &path, const LabelVolume &v);  // stored as real
LabelVolume read_qmap_labels(const std::string &path);

// .kspc: radial k-space block with trailing trajectory table.
void write_kspc(const std::string &path, const RadialKSpace &k);
RadialKSpace read_kspc(const std::string &path);

// .dfld: displacement field with source/target phases.
void write_dfld(const std::string &path, const DeformationField &f);
DeformationField read_dfld(const std::string &path);

// .dict: grid axes, singular spectrum, basis and fingerprints.
void write_dict(const std::string &path, const CompressedDictionary &d);
CompressedDictionary read_dict(const std::string &path);

// .knav: navigator profile series.
void write_knav(const std::string &path, const NavigatorSeries &n);
NavigatorSeries read_knav(const std::string &path);

// Parametric maps as one .qmap per parameter plus a JSON sidecar.
void write_maps(const std::string &dir, const std::string &stem,
                const ParametricMaps &maps, Vec3 spacing);
ParametricMaps read_maps(const std::string &dir, const std::string &stem);

std::uint64_t fnv1a_file(const std::string &path);

}  // namespace mrfmoco
