#pragma once

// Checkpoint file: one line of JSON (terminated by '\n') followed by the
// payload, little-endian float32 arrays in row-major order. Blocks appear in
// a fixed order: entities, relations, concepts, meta_relations, then
// ct_weight, ct_bias for CT variants and ha_weight, ha_bias for HA variants.
// Block offsets in the header are relative to the first payload byte.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "twoview/kb.hpp"
#include "twoview/model.hpp"

namespace twoview {

inline constexpr int checkpoint_format_version = 1;

struct VocabSignature {
    std::size_t size = 0;
    std::uint64_t hash = 0;

    friend bool operator==(const VocabSignature&, const VocabSignature&) = default;
};

/// Signatures of the four vocabularies, in Table order.
using VocabSignatures = std::array<VocabSignature, table_count>;

VocabSignatures signatures_of(const KnowledgeBase& kb);

struct Checkpoint {
    ModelConfig model;
    VocabSignatures vocab;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    ModelParams params;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws CheckpointError when the header is malformed or the payload length
/// differs from the declared shapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Throws CheckpointError naming the first vocabulary whose size or hash
/// differs from the dataset.
void verify_vocab(const Checkpoint& checkpoint, const VocabSignatures& dataset);

std::string hash_hex(std::uint64_t hash);

}  // namespace twoview
