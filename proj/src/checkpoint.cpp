#include "twoview/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

#include "twoview/errors.hpp"

namespace twoview {

using json = nlohmann::json;

namespace {

struct Block {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::span<const float> data;
};

std::vector<Block> blocks_of(const ModelParams& p) {
    std::vector<Block> out;
    for (std::size_t i = 0; i < table_count; ++i) {
        const auto& t = p.tables[i];
        out.push_back({std::string(table_name(static_cast<Table>(i))), t.rows, t.dim, t.data});
    }
    if (p.ct_map) {
        out.push_back({"ct_weight", p.ct_map->out_dim, p.ct_map->in_dim, p.ct_map->weight});
        out.push_back({"ct_bias", p.ct_map->out_dim, 1, p.ct_map->bias});
    }
    if (p.ha_map) {
        out.push_back({"ha_weight", p.ha_map->out_dim, p.ha_map->in_dim, p.ha_map->weight});
        out.push_back({"ha_bias", p.ha_map->out_dim, 1, p.ha_map->bias});
    }
    return out;
}

void append_le(std::string& buf, float x) {
    auto bits = std::bit_cast<std::uint32_t>(x);
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

float read_le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

std::uint64_t parse_hex(const std::string& s) {
    if (s.size() != 16) throw CheckpointError("vocabulary hash must be 16 hex digits, got '" + s + "'");
    std::uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw CheckpointError("vocabulary hash must be lowercase hex, got '" + s + "'");
    }
    return v;
}

}  // namespace

std::string hash_hex(std::uint64_t hash) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, hash >>= 4) s[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    return s;
}

VocabSignatures signatures_of(const KnowledgeBase& kb) {
    const Vocab* v[table_count] = {&kb.entities, &kb.relations, &kb.concepts, &kb.meta_relations};
    VocabSignatures out;
    for (std::size_t i = 0; i < table_count; ++i) out[i] = {v[i]->size(), v[i]->content_hash()};
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    const auto blocks = blocks_of(ck.params);
    json header;
    header["format"] = "twoview-checkpoint";
    header["format_version"] = checkpoint_format_version;
    header["variant"] = ck.model.variant();
    header["entity_dim"] = ck.model.entity_dim;
    header["concept_dim"] = ck.model.concept_dim;
    header["seed"] = ck.seed;
    header["epoch"] = ck.epoch;
    json vocab = json::object();
    for (std::size_t i = 0; i < table_count; ++i)
        vocab[std::string(table_name(static_cast<Table>(i)))] = {{"size", ck.vocab[i].size},
                                                                 {"hash", hash_hex(ck.vocab[i].hash)}};
    header["vocab"] = vocab;
    json list = json::array();
    std::size_t offset = 0;
    for (const auto& b : blocks) {
        const std::size_t bytes = b.data.size() * sizeof(float);
        list.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"offset", offset}, {"bytes", bytes}});
        offset += bytes;
    }
    header["blocks"] = list;
    header["payload_bytes"] = offset;

    std::string buf = header.dump();
    buf.push_back('\n');
    buf.reserve(buf.size() + offset);
    for (const auto& b : blocks)
        for (float x : b.data) append_le(buf, x);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto nl = bytes.find('\n');
    if (nl == std::string::npos) throw CheckpointError(path.string() + ": missing header line");

    json header;
    try {
        header = json::parse(bytes.substr(0, nl));
    } catch (const json::parse_error& e) {
        throw CheckpointError(path.string() + ": header is not valid JSON (" + e.what() + ")");
    }

    Checkpoint ck;
    std::vector<json> blocks;
    std::size_t payload_bytes = 0;
    try {
        if (header.at("format").get<std::string>() != "twoview-checkpoint")
            throw CheckpointError(path.string() + ": not a checkpoint file");
        const int version = header.at("format_version").get<int>();
        if (version != checkpoint_format_version)
            throw CheckpointError(path.string() + ": unsupported format version " + std::to_string(version));
        ck.model = ModelConfig::from_variant(header.at("variant").get<std::string>());
        ck.model.entity_dim = header.at("entity_dim").get<std::size_t>();
        ck.model.concept_dim = header.at("concept_dim").get<std::size_t>();
        ck.seed = header.at("seed").get<std::uint64_t>();
        ck.epoch = header.at("epoch").get<std::size_t>();
        for (std::size_t i = 0; i < table_count; ++i) {
            const auto& v = header.at("vocab").at(std::string(table_name(static_cast<Table>(i))));
            ck.vocab[i] = {v.at("size").get<std::size_t>(), parse_hex(v.at("hash").get<std::string>())};
        }
        blocks = header.at("blocks").get<std::vector<json>>();
        payload_bytes = header.at("payload_bytes").get<std::size_t>();
    } catch (const json::exception& e) {
        throw CheckpointError(path.string() + ": incomplete header (" + e.what() + ")");
    } catch (const ConfigError& e) {
        throw CheckpointError(path.string() + ": " + e.what());
    }

    // Expected layout from the declared variant, dims and vocabulary sizes.
    const std::size_t de = ck.model.entity_dim, dc = ck.model.concept_dim;
    auto& p = ck.params;
    p.tables[0] = EmbeddingTable<float>(ck.vocab[0].size, de);
    p.tables[1] = EmbeddingTable<float>(ck.vocab[1].size, de);
    p.tables[2] = EmbeddingTable<float>(ck.vocab[2].size, dc);
    p.tables[3] = EmbeddingTable<float>(ck.vocab[3].size, dc);
    if (ck.model.cross == CrossKind::Transformation) p.ct_map.emplace(dc, de);
    if (ck.model.hierarchy_aware) p.ha_map.emplace(dc, dc);
    const auto expected = blocks_of(p);

    if (blocks.size() != expected.size())
        throw CheckpointError(path.string() + ": expected " + std::to_string(expected.size()) + " blocks for " +
                              ck.model.variant() + ", header lists " + std::to_string(blocks.size()));
    std::size_t offset = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const auto& e = expected[i];
        const std::size_t bytes = e.data.size() * sizeof(float);
        try {
            if (b.at("name").get<std::string>() != e.name || b.at("rows").get<std::size_t>() != e.rows ||
                b.at("cols").get<std::size_t>() != e.cols || b.at("offset").get<std::size_t>() != offset ||
                b.at("bytes").get<std::size_t>() != bytes)
                throw CheckpointError(path.string() + ": block " + std::to_string(i) + " does not match the expected " +
                                      e.name + " [" + std::to_string(e.rows) + "x" + std::to_string(e.cols) + "]");
        } catch (const json::exception& ex) {
            throw CheckpointError(path.string() + ": malformed block entry (" + ex.what() + ")");
        }
        offset += bytes;
    }
    const std::size_t actual = bytes.size() - nl - 1;
    if (payload_bytes != offset || actual != offset)
        throw CheckpointError(path.string() + ": payload is " + std::to_string(actual) + " bytes, shapes declare " +
                              std::to_string(offset));

    const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
    auto fill = [&](std::vector<float>& dst) {
        for (auto& x : dst) {
            x = read_le(src);
            src += 4;
        }
    };
    for (auto& t : p.tables) fill(t.data);
    if (p.ct_map) fill(p.ct_map->weight), fill(p.ct_map->bias);
    if (p.ha_map) fill(p.ha_map->weight), fill(p.ha_map->bias);
    return ck;
}

void verify_vocab(const Checkpoint& checkpoint, const VocabSignatures& dataset) {
    for (std::size_t i = 0; i < table_count; ++i) {
        const auto& a = checkpoint.vocab[i];
        const auto& b = dataset[i];
        if (a == b) continue;
        throw CheckpointError("checkpoint does not match the dataset: " + std::string(table_name(static_cast<Table>(i))) +
                              " vocabulary is " + std::to_string(a.size) + " names / hash " + hash_hex(a.hash) +
                              " in the checkpoint but " + std::to_string(b.size) + " names / hash " +
                              hash_hex(b.hash) + " in the dataset; refusing to continue");
    }
}

}  // namespace twoview
