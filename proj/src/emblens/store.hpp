#ifndef EMBLENS_STORE_HPP
#define EMBLENS_STORE_HPP

#include <cstdint>
#include <string>

#include "types.hpp"

namespace emblens {

// On-disk precision for the binary embedding format.
enum class Dtype : std::uint8_t { f32 = 0, f64 = 1 };

// Binary layout: magic "EMBV1\n", u8 dtype (0 = f32, 1 = f64), u32 n, u32 d
// (little-endian), then n*d values row-major. Files not starting with the
// magic are parsed as CSV: no header, d comma-separated decimals per line.
EmbeddingSet load_embeddings(const std::string& path);
void save_embeddings(const EmbeddingSet& embeddings, const std::string& path,
                     Dtype dtype = Dtype::f64);

// Text format: one base-10 label per line, LF-terminated.
Partition load_partition(const std::string& path, std::size_t n_expected);
void save_partition(const Partition& partition, const std::string& path);

// Manifest: JSON with fields run_id, milestones[{id, epoch, embeddings,
// labels?, reference_value?}], settings{...}. Relative paths resolve against
// the manifest's directory, and every referenced file must exist.
RunManifest load_manifest(const std::string& path);
void save_manifest(const RunManifest& manifest, const std::string& path);

Milestone load_milestone(const MilestoneEntry& entry);

} // namespace emblens

#endif
