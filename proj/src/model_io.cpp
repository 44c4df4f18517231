#include <json.hpp>

#include "octvf/bytes.hpp"
#include "octvf/model.hpp"

namespace octvf {

using nlohmann::json;

namespace {

json spec_to_json(const ModelSpec& spec) {
    json blocks = json::array();
    for (const auto& b : spec.blocks) {
        blocks.push_back({{"channels", b.channels}, {"pool", b.pool}, {"residual", b.residual}});
    }
    return json{{"in_channels", spec.in_channels},
                {"input_h", spec.input_h},
                {"input_w", spec.input_w},
                {"stem_channels", spec.stem_channels},
                {"blocks", blocks},
                {"out_channels", spec.out_channels}};
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec spec;
    spec.in_channels = j.at("in_channels").get<int>();
    spec.input_h = j.at("input_h").get<int>();
    spec.input_w = j.at("input_w").get<int>();
    spec.stem_channels = j.at("stem_channels").get<int>();
    spec.blocks.clear();
    for (const auto& b : j.at("blocks")) {
        spec.blocks.push_back({b.at("channels").get<int>(), b.at("pool").get<bool>(),
                               b.at("residual").get<bool>()});
    }
    spec.out_channels = j.at("out_channels").get<int>();
    spec.validate();
    return spec;
}

}  // namespace

std::string ModelSpec::to_json() const {
    return spec_to_json(*this).dump();
}

ModelSpec ModelSpec::from_json(const std::string& json_text) {
    try {
        return spec_from_json(json::parse(json_text));
    } catch (const json::exception& e) {
        throw Error(std::string("model spec json: ") + e.what());
    }
}

std::string write_checkpoint(Model<float>& model, const CheckpointMeta& meta) {
    json header{{"format", "octvf-checkpoint"},
                {"version", 1},
                {"model", spec_to_json(model.spec)},
                {"epoch", meta.epoch},
                {"seed", meta.seed},
                {"optimizer", {{"type", "adam"}, {"t", meta.adam_step}, {"lr", meta.lr}}},
                {"val_r2", meta.val_r2},
                {"target", meta.target},
                {"modality", meta.modality}};
    const std::string header_text = header.dump();

    ByteWriter w;
    w.u32(static_cast<uint32_t>(header_text.size()));
    w.raw(header_text.data(), header_text.size());

    uint64_t count = 0;
    auto state = model.state_tensors();
    for (const auto& p : state) count += static_cast<uint64_t>(p.tensor->size());
    w.u64(count);
    for (const auto& p : state) {
        static_assert(sizeof(float) == 4);
        w.raw(p.tensor->data.data(), p.tensor->size() * sizeof(float));
    }
    return w.take();
}

void write_checkpoint_file(const std::string& path, Model<float>& model,
                           const CheckpointMeta& meta) {
    write_file_bytes(path, write_checkpoint(model, meta));
}

Checkpoint read_checkpoint(const std::string& bytes) {
    ByteReader r(bytes);
    const uint32_t header_len = r.u32();
    std::string header_text(header_len, '\0');
    r.raw(header_text.data(), header_len, "checkpoint header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw Error(std::string("checkpoint header: ") + e.what());
    }
    if (header.value("format", "") != "octvf-checkpoint") {
        throw Error("checkpoint: unknown format");
    }
    if (header.value("version", 0) != 1) throw Error("checkpoint: unsupported version");

    Checkpoint ckpt;
    ckpt.model = make_model<float>(spec_from_json(header.at("model")), 0);
    ckpt.meta.epoch = header.value("epoch", 0);
    ckpt.meta.seed = header.value("seed", uint64_t{0});
    ckpt.meta.adam_step = header.at("optimizer").value("t", int64_t{0});
    ckpt.meta.lr = header.at("optimizer").value("lr", 0.0);
    ckpt.meta.val_r2 = header.value("val_r2", 0.0);
    ckpt.meta.target = header.value("target", "");
    ckpt.meta.modality = header.value("modality", "");

    const uint64_t count = r.u64();
    uint64_t expected = 0;
    auto state = ckpt.model.state_tensors();
    for (const auto& p : state) expected += static_cast<uint64_t>(p.tensor->size());
    if (count != expected) {
        throw ParseError(r.offset(), "checkpoint blob holds " + std::to_string(count) +
                                         " floats, model needs " + std::to_string(expected));
    }
    for (const auto& p : state) {
        r.raw(p.tensor->data.data(), p.tensor->size() * sizeof(float), p.name.c_str());
    }
    if (!r.eof()) throw ParseError(r.offset(), "trailing bytes after checkpoint blob");
    return ckpt;
}

Checkpoint read_checkpoint_file(const std::string& path) {
    return read_checkpoint(read_file_bytes(path));
}

}  // namespace octvf
