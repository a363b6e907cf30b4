#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "genoseq/model.hpp"

namespace genoseq {

namespace {

constexpr char kMagic[8] = {'G', 'S', 'Q', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

[[noreturn]] void format_error(const std::string& message) {
    throw ModelError(ModelError::Code::CheckpointFormat, message);
}

nlohmann::ordered_json config_json(const ModelConfig& c) {
    nlohmann::ordered_json j;
    j["vocab_size"] = c.vocab_size;
    j["d_model"] = c.d_model;
    j["num_layers"] = c.num_layers;
    j["num_heads"] = c.num_heads;
    j["d_ff"] = c.d_ff;
    j["max_len"] = c.max_len;
    j["num_classes"] = c.num_classes;
    j["dropout"] = c.dropout;
    j["scheme"] = scheme_name(c.scheme);
    return j;
}

ModelConfig parse_config(const nlohmann::json& j) {
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.num_heads = j.at("num_heads").get<std::size_t>();
    c.d_ff = j.at("d_ff").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.scheme = parse_scheme(j.at("scheme").get<std::string>());
    c.validate();
    return c;
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return config_json(config).dump(); }

ModelConfig config_from_json(const std::string& text) {
    try {
        return parse_config(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        format_error(std::string("bad model config: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const ModelConfig& config,
                     const ModelParams& params) {
    auto tensors = const_cast<ModelParams&>(params).tensors();
    nlohmann::ordered_json header;
    header["config"] = config_json(config);
    auto shapes = nlohmann::ordered_json::array();
    for (const auto& t : tensors) {
        shapes.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}});
    }
    header["tensors"] = std::move(shapes);
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        format_error("cannot write " + path);
    }
    const std::uint64_t header_len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : tensors) {
        out.write(reinterpret_cast<const char*>(t.values.data()),
                  static_cast<std::streamsize>(t.values.size_bytes()));
    }
    if (!out) {
        format_error("write failed for " + path);
    }
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        format_error("cannot open " + path);
    }
    char magic[sizeof kMagic];
    std::uint64_t header_len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || header_len > (1U << 30)) {
        format_error(path + " is not a checkpoint");
    }
    std::string text(header_len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(header_len));

    nlohmann::json header;
    ModelConfig config;
    try {
        header = nlohmann::json::parse(text);
        config = parse_config(header.at("config"));
    } catch (const nlohmann::json::exception& e) {
        format_error(std::string("bad checkpoint header: ") + e.what());
    }

    ModelParams params = ModelParams::zeros(config);
    auto tensors = params.tensors();
    const auto& shapes = header.at("tensors");
    if (shapes.size() != tensors.size()) {
        format_error("checkpoint tensor count does not match its config");
    }
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (shapes[i].at("name").get<std::string>() != tensors[i].name ||
            shapes[i].at("rows").get<Eigen::Index>() != tensors[i].rows ||
            shapes[i].at("cols").get<Eigen::Index>() != tensors[i].cols) {
            format_error("checkpoint tensor " + tensors[i].name + " has an unexpected shape");
        }
        in.read(reinterpret_cast<char*>(tensors[i].values.data()),
                static_cast<std::streamsize>(tensors[i].values.size_bytes()));
    }
    if (!in) {
        format_error(path + " is truncated");
    }
    return {config, std::move(params)};
}

}  // namespace genoseq
